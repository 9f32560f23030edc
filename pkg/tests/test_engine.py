import math

import numpy as np
import pytest

from hyponorm.engine import (
    EXACT_METHODS,
    HypoCache,
    MethodMismatchError,
    OptimizerConfig,
    certify,
    combine,
    dual_lower_bound,
    dual_objective,
    extremizer_boundary,
    gram_sigma_max,
    grid_oracle,
    holder_extremizer,
    hypo_norm,
)
from hyponorm.linalg import INF, TupleX, conjugate_exponent, ground_norm, scalar_pnorm, tuple_pnorm

from conftest import GROUNDS, random_tuple, rel_close

EXPS = (1.0, 1.5, 2.0, 3.0, INF)


def check_result_invariants(x, res):
    p = conjugate_exponent(res.q)
    assert res.lower <= res.upper + 1e-12 * max(1.0, res.upper)
    assert scalar_pnorm(res.witness, p) <= 1 + 1e-10
    assert rel_close(ground_norm(combine(x, res.witness), x.space), res.lower, 1e-10)


class TestConfig:
    @pytest.mark.parametrize("kw", [{"restarts": 0}, {"max_iterations": 0}, {"step_shrink": 1.0},
                                    {"step_shrink": 0.0}, {"seed": -1}, {"grid_resolution": 0},
                                    {"enum_threshold": 0}])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            OptimizerConfig(**kw)


class TestPrimitives:
    def test_combine(self):
        x = TupleX.from_vectors([[1.0, 2.0], [3.0, 4.0]])
        assert combine(x, [1, 0]).tolist() == [1.0, 2.0]
        assert combine(x, [0, 0]).tolist() == [0.0, 0.0]
        v = TupleX.from_vectors([[1.0, -5.0], [1.0, -5.0]])
        assert combine(v, [1, -1]).tolist() == [0.0, 0.0]
        with pytest.raises(ValueError):
            combine(x, [1, 0, 0])

    def test_dual_objective(self):
        e = TupleX.from_vectors(np.eye(2))
        assert dual_objective([0, 0], e, 2) == 0.0
        assert dual_objective([1, 0], e, 2) == 1.0
        v = TupleX.from_vectors([[1.0, 2.0], [1.0, 2.0]])
        assert dual_objective([0.5, -3.0], v, 1) == pytest.approx(2 * abs(0.5 - 6.0))
        assert dual_objective([0.5, -3.0], v, INF) == pytest.approx(5.5)
        with pytest.raises(ValueError):
            dual_objective([1, 0, 0], e, 2)

    def test_holder_examples(self):
        a = holder_extremizer([3, 4], 2)
        assert np.allclose(a, [0.6, 0.8], rtol=1e-15)
        assert holder_extremizer([0, 2.5], 3).tolist() == [0.0, 1.0]
        b = holder_extremizer([1, 1], 3)
        assert scalar_pnorm(b, 1.5) == pytest.approx(1.0, abs=1e-12)
        assert np.sum(b) == pytest.approx(2 ** (1 / 3), rel=1e-12)

    def test_holder_matches_grid(self):
        # maximise a1 + a2 over a fine grid of the 3/2-sphere
        t = np.linspace(0, 2 * np.pi, 200_001)
        c, s = np.cos(t), np.sin(t)
        r = (np.abs(c) ** 1.5 + np.abs(s) ** 1.5) ** (1 / 1.5)
        best = np.max((c + s) / r)
        assert best == pytest.approx(2 ** (1 / 3), abs=1e-9)

    @pytest.mark.parametrize("q", [1.2, 2.0, 3.0, 7.0])
    def test_holder_realises_norm(self, rng, q):
        for _ in range(50):
            beta = rng.normal(size=5) + 1j * rng.normal(size=5)
            beta[rng.integers(0, 5)] = 0
            a = holder_extremizer(beta, q)
            p = conjugate_exponent(q)
            assert scalar_pnorm(a, p) == pytest.approx(1.0, abs=1e-12)
            pairing = np.sum(a * beta)
            assert pairing.real == pytest.approx(scalar_pnorm(beta, q), rel=1e-12)
            assert abs(pairing.imag) <= 1e-12 * abs(pairing)
            assert np.all(a[beta == 0] == 0)

    def test_holder_rejections(self):
        with pytest.raises(ValueError):
            holder_extremizer([0, 0], 2)
        for q in (1, INF):
            with pytest.raises(ValueError):
                holder_extremizer([1, 2], q)

    def test_boundary_examples(self):
        assert extremizer_boundary([1, -7, 5], INF).tolist() == [0, -1, 0]
        assert extremizer_boundary([1, -2, 2], 1).tolist() == [1, -1, 1]
        assert extremizer_boundary([1j, 0], 1).tolist() == [-1j, 0]
        assert extremizer_boundary([2, -2, 1], INF).tolist() == [1, 0, 0]
        with pytest.raises(ValueError):
            extremizer_boundary([0, 0], 1)
        with pytest.raises(ValueError):
            extremizer_boundary([1, 0], 2)


class TestSpectral:
    def test_examples(self):
        assert gram_sigma_max(TupleX.from_vectors(np.eye(4))) == pytest.approx(1.0, rel=1e-12)
        v = TupleX.from_vectors([[3.0, 4.0]])
        assert gram_sigma_max(v) == pytest.approx(5.0, rel=1e-12)
        pair = TupleX.from_vectors([[1.0, 0.0], [1.0, 0.0]])
        assert gram_sigma_max(pair) == pytest.approx(math.sqrt(2), rel=1e-12)
        assert grid_oracle(pair, 2) == pytest.approx(math.sqrt(2), abs=1e-4)

    def test_matches_svd(self, rng):
        for field in ("real", "complex"):
            for _ in range(30):
                x = random_tuple(rng, int(rng.integers(1, 9)), int(rng.integers(1, 9)), field)
                sv = np.linalg.svd(x.data, compute_uv=False)[0]
                assert gram_sigma_max(x) == pytest.approx(sv, rel=1e-10)

    def test_clustered_spectrum(self):
        # nearly equal top singular values stress the power iteration
        u, _ = np.linalg.qr(np.random.default_rng(1).normal(size=(6, 6)))
        d = np.diag([1.0, 1.0 - 1e-9, 0.5, 0.2, 0.1, 0.0])
        x = TupleX.from_vectors(u @ d @ u.T)
        assert gram_sigma_max(x) == pytest.approx(1.0, rel=1e-10)

    def test_rejects_non_euclidean(self):
        with pytest.raises(MethodMismatchError):
            gram_sigma_max(TupleX.from_vectors(np.eye(2), ground_exponent=1))


class TestGridOracle:
    def test_examples(self, rng):
        v = rng.normal(size=3)
        for q in EXPS:
            assert grid_oracle(TupleX.from_vectors([v]), q, 4) == pytest.approx(np.linalg.norm(v), rel=1e-12)
        assert grid_oracle(TupleX.from_vectors(np.zeros((2, 2))), 2) == 0.0
        dup = TupleX.from_vectors([v, v])
        assert abs(grid_oracle(dup, 2, 720) - math.sqrt(2) * np.linalg.norm(v)) <= 1e-4 * np.linalg.norm(v)

    def test_size_limits(self):
        with pytest.raises(ValueError):
            grid_oracle(TupleX.from_vectors(np.eye(4)), 2)
        with pytest.raises(ValueError):
            grid_oracle(TupleX.from_vectors(np.eye(3) * 1j), 2)

    def test_complex_duplicate(self):
        v = np.array([1 + 1j, 2 - 0.5j])
        x = TupleX.from_vectors([v, 1j * v])
        # |l1 + i l2| is maximised with aligned phases
        assert grid_oracle(x, 2, 360) == pytest.approx(math.sqrt(2) * np.linalg.norm(v), rel=1e-4)


class TestHypoNorm:
    def test_closed_form_example(self):
        x = TupleX.from_vectors([[1.0, 0.0], [0.0, 2.0], [3.0, 0.0]])
        r = hypo_norm(x, INF)
        assert (r.lower, r.upper, r.method) == (3.0, 3.0, "closed_form_max")
        assert r.witness.tolist() == [0, 0, 1]

    def test_closed_form_first_max_tie(self):
        x = TupleX.from_vectors([[2.0, 0.0], [0.0, 2.0]])
        assert hypo_norm(x, INF).witness.tolist() == [1, 0]

    @pytest.mark.parametrize("q", EXPS)
    @pytest.mark.parametrize("s", GROUNDS)
    def test_duplicate_identity(self, rng, q, s):
        v = rng.normal(size=3)
        x = TupleX.from_vectors([v, v], ground_exponent=s)
        expect = 2 ** (1 / q) * ground_norm(v, x.space)
        r = certify(x, q)
        assert r.lower == pytest.approx(expect, rel=1e-6)
        assert r.lower <= expect * (1 + 1e-12) <= r.upper * (1 + 2e-12)
        if q in (1.0, 2.0, INF):
            assert grid_oracle(x, q) == pytest.approx(expect, rel=1e-4)

    def test_duplicate_interval_width_q3(self, rng):
        v = rng.normal(size=4)
        r = certify(TupleX.from_vectors([v, v]), 3)
        value = 2 ** (1 / 3) * np.linalg.norm(v)
        assert r.lower <= value * (1 + 1e-12) and value <= r.upper * (1 + 1e-12)
        assert r.width <= 1e-6 * value

    def test_orthonormal(self):
        e = TupleX.from_vectors(np.eye(5))
        r = hypo_norm(e, 2)
        assert r.method == "spectral" and r.lower == pytest.approx(1.0, rel=1e-12)
        pair = TupleX.from_vectors(np.eye(2))
        c = certify(pair, 1)
        assert c.lower <= math.sqrt(2) * (1 + 1e-12) and math.sqrt(2) <= c.upper * (1 + 1e-12)

    def test_sign_enum_example(self):
        x = TupleX.from_vectors(np.eye(2), ground_exponent=INF)
        r = hypo_norm(x, 1)
        assert r.method == "sign_enum" and r.lower == 1.0 == r.upper

    def test_sign_enum_matches_grid(self, rng):
        for _ in range(20):
            x = random_tuple(rng, 3, 3, s=float(rng.choice([1.0, 2.0, INF])))
            r = hypo_norm(x, 1, method="enum")
            assert r.lower == r.upper
            g = grid_oracle(x, 1, 720)
            assert g <= r.lower * (1 + 1e-12)
            # the l_inf-sphere vertices are not grid points for n = 3
            assert g >= r.lower * (1 - 1e-2)

    def test_sign_enum_brute_force(self, rng):
        import itertools
        for _ in range(20):
            x = random_tuple(rng, 5, 2, s=1.0)
            brute = max(ground_norm(combine(x, np.array(e, float)), x.space)
                        for e in itertools.product((-1, 1), repeat=5))
            assert hypo_norm(x, 1).lower == pytest.approx(brute, rel=1e-14)

    def test_zero_tuple(self):
        z = TupleX.from_vectors(np.zeros((3, 2)))
        for q in EXPS:
            r = certify(z, q)
            assert r.lower == 0.0 == r.upper
            assert r.witness.tolist() == [1, 0, 0]

    def test_single_vector(self, rng):
        v = rng.normal(size=4)
        for s in GROUNDS:
            x = TupleX.from_vectors([v], ground_exponent=s)
            for q in EXPS:
                r = certify(x, q)
                assert r.lower == pytest.approx(ground_norm(v, x.space), rel=1e-12)
                assert r.upper == pytest.approx(ground_norm(v, x.space), rel=1e-12)

    @pytest.mark.parametrize("field", ["real", "complex"])
    @pytest.mark.parametrize("s", GROUNDS)
    def test_result_invariants_and_sandwich(self, rng, fast_cfg, field, s):
        for _ in range(6):
            x = random_tuple(rng, int(rng.integers(1, 6)), int(rng.integers(1, 5)), field, s)
            for q in EXPS:
                r = certify(x, q, fast_cfg)
                check_result_invariants(x, r)
                tp = tuple_pnorm(x, q)
                assert x.n ** (-1 / q) * tp <= r.upper * (1 + 1e-9)
                assert r.lower <= tp * (1 + 1e-9)
                assert tuple_pnorm(x, INF) <= r.upper * (1 + 1e-9)
                if r.method in EXACT_METHODS:
                    assert tuple_pnorm(x, INF) <= r.lower * (1 + 1e-9)

    def test_ascent_vs_grid(self, rng, fast_cfg):
        for _ in range(12):
            x = random_tuple(rng, int(rng.integers(2, 4)), 3, s=float(rng.choice([1.0, 2.0, INF])))
            for q in (1.5, 3.0):
                r = certify(x, q, fast_cfg)
                g = grid_oracle(x, q, 360)
                assert r.lower >= g - 1e-6 * max(1.0, g)
                assert g <= r.upper * (1 + 1e-12)

    def test_complex_ascent_vs_phase_grid(self, rng, fast_cfg):
        for _ in range(6):
            x = random_tuple(rng, 2, 3, "complex", s=float(rng.choice([1.0, 2.0, INF])))
            for q in (1.0, 1.5, 3.0):
                r = certify(x, q, fast_cfg)
                g = hypo_norm(x, q, method="grid")
                assert g.method == "phase_grid"
                assert r.lower >= g.lower - 1e-6 * max(1.0, g.lower)

    def test_homogeneity(self, rng):
        x = random_tuple(rng, 4, 3, "complex", 1.0)
        c = -2.5 + 0.5j
        for q in EXPS:
            a, b = certify(x, q), certify(x.scaled(c), q)
            assert b.lower == pytest.approx(abs(c) * a.lower, rel=1e-10)
            assert b.upper == pytest.approx(abs(c) * a.upper, rel=1e-10)

    def test_permutation_invariance(self, rng):
        x = random_tuple(rng, 5, 3)
        perm = x.with_data(x.data[[3, 1, 4, 0, 2]])
        for q in (1.0, 2.0, INF):
            assert hypo_norm(perm, q).lower == pytest.approx(hypo_norm(x, q).lower, rel=1e-12)
        for q in (1.5, 3.0):
            assert hypo_norm(perm, q).lower == pytest.approx(hypo_norm(x, q).lower, rel=1e-8)

    def test_triangle_inequality_exact(self, rng):
        for _ in range(20):
            x, y = random_tuple(rng, 4, 3), random_tuple(rng, 4, 3)
            for q in (1.0, 2.0, INF):
                lhs = hypo_norm(x + y, q).lower
                rhs = hypo_norm(x, q).lower + hypo_norm(y, q).lower
                assert lhs <= rhs * (1 + 1e-9)

    def test_dual_route_agrees_with_spectral(self, rng):
        for _ in range(10):
            x = random_tuple(rng, 4, 5)
            assert dual_lower_bound(x, 2) == pytest.approx(gram_sigma_max(x), rel=1e-8)

    def test_method_mismatch(self):
        x = TupleX.from_vectors(np.eye(2), ground_exponent=1)
        with pytest.raises(MethodMismatchError):
            hypo_norm(x, 2, method="spectral")
        with pytest.raises(MethodMismatchError):
            hypo_norm(x, 2, method="closed_form")
        with pytest.raises(MethodMismatchError):
            hypo_norm(x, 2, method="enum")
        with pytest.raises(MethodMismatchError):
            hypo_norm(TupleX.from_vectors(np.eye(2) * 1j), 1, method="enum")
        with pytest.raises(MethodMismatchError):
            hypo_norm(TupleX.from_vectors(np.eye(4)), 1, method="grid")

    def test_forced_ascent_stays_below_exact(self, rng):
        x = random_tuple(rng, 6, 4)
        exact = hypo_norm(x, 2).lower
        r = hypo_norm(x, 2, method="ascent")
        assert r.method == "ascent"
        assert r.lower <= exact * (1 + 1e-10)
        assert r.lower == pytest.approx(exact, rel=1e-6)

    def test_deterministic(self, rng):
        x = random_tuple(rng, 5, 3, "complex", 1.0)
        a, b = hypo_norm(x, 1.5), hypo_norm(x, 1.5)
        assert a.lower == b.lower and np.array_equal(a.witness, b.witness)

    def test_cache_and_widening(self, rng):
        x = random_tuple(rng, 4, 3, s=1.0)
        cache = HypoCache(x)
        r = cache(1.5)
        assert cache(1.5) is r
        w = cache.widened(0.1)
        rw = w(1.5)
        assert rw.lower <= r.lower and rw.upper >= r.upper
        assert (w(INF).lower, w(INF).upper) == (cache(INF).lower, cache(INF).upper)
