"""Hypo-q-norms of tuples with certified intervals.

``hypo(x, q) = sup { ||sum_j lam_j x_j|| : ||lam||_p <= 1 }`` with p
conjugate to q.  Exact routes:

* q = inf: the largest ground norm;
* q = 2 on a Euclidean ground space: the largest singular value of the
  matrix whose rows are the x_j (power iteration on the Gram matrix);
* q = 1 over the reals, small n: enumeration of sign vectors.

Everything else goes through a multi-start alternating ascent that pairs
each coefficient vector with a norming functional of ``sum lam_j x_j`` and
each functional with the Hoelder extremizer of ``(f(x_1), ..., f(x_n))``.
Each alternation step cannot decrease the objective.  Upper bounds never
come from the optimizer, only from closed forms and norm relaxations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from hyponorm.linalg import (
    INF,
    TupleX,
    _pnorm_rows,
    as_exponent,
    conjugate_exponent,
    ground_norm,
    scalar_pnorm,
    tuple_pnorm,
)
from hyponorm.rng import ASCENT, PERTURB, Stream, stream_id

EXACT_METHODS = frozenset({"closed_form_max", "spectral", "sign_enum"})
METHODS = ("closed_form_max", "spectral", "sign_enum", "phase_grid", "ascent", "grid")
METHOD_CHOICES = ("auto", "closed_form", "spectral", "enum", "grid", "ascent")

EXACT_TOL = 1e-10
ENUM_HARD_LIMIT = 20
GRID_CHUNK = 65536


class MethodMismatchError(ValueError):
    """The requested method does not apply to this tuple/exponent."""


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 16
    max_iterations: int = 400
    step_shrink: float = 0.7
    seed: int = 0
    grid_resolution: int = 720
    enum_threshold: int = 12
    stall_window: int = 50
    stall_tol: float = 1e-6

    def __post_init__(self):
        for name in ("restarts", "max_iterations", "grid_resolution", "enum_threshold", "stall_window"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if not 0.0 < self.step_shrink < 1.0:
            raise ValueError("step_shrink must lie in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True, eq=False)
class HypoNormResult:
    lower: float
    upper: float
    witness: np.ndarray
    method: str
    q: float
    iterations: int = 0
    tolerance: float = 0.0
    upper_source: str = ""
    dual_lower: float | None = None
    certified: bool = False

    @property
    def exact(self) -> bool:
        return self.method in EXACT_METHODS

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def value(self) -> float:
        return self.lower

    def as_dict(self) -> dict:
        w = self.witness
        if np.iscomplexobj(w):
            wit = [[float(z.real), float(z.imag)] for z in w]
        else:
            wit = [float(v) for v in w]
        return {
            "q": self.q,
            "lower": self.lower,
            "upper": self.upper,
            "width": self.width,
            "method": self.method,
            "exact": self.exact,
            "iterations": self.iterations,
            "tolerance": self.tolerance,
            "upper_source": self.upper_source,
            "dual_lower": self.dual_lower,
            "witness": wit,
        }


# ---------------------------------------------------------------------------
# combination, dual objective, extremizers
# ---------------------------------------------------------------------------


def _coefficients(x: TupleX, lam) -> np.ndarray:
    lam = np.asarray(lam)
    if lam.shape != (x.n,):
        raise ValueError(f"coefficient vector has shape {lam.shape}, expected ({x.n},)")
    if x.space.field == "real" and np.iscomplexobj(lam):
        if np.any(lam.imag != 0):
            raise ValueError("complex coefficients for a real ground space")
        lam = lam.real
    return lam


def combine(x: TupleX, lam) -> np.ndarray:
    """``sum_j lam_j x_j``."""
    return _coefficients(x, lam) @ x.data


def dual_objective(f, x: TupleX, q) -> float:
    """q-norm of ``(f(x_1), ..., f(x_n))`` for a functional given by coordinates."""
    q = as_exponent(q)
    f = np.asarray(f)
    if f.shape != (x.m,):
        raise ValueError(f"functional has shape {f.shape}, expected ({x.m},)")
    return scalar_pnorm(x.data @ f, q)


def _phases(b: np.ndarray, mod: np.ndarray) -> np.ndarray:
    if not np.iscomplexobj(b):
        return np.sign(b)
    # componentwise real division: complex division overflows for subnormal moduli
    safe = np.where(mod > 0, mod, 1.0)
    return (b.real / safe) - 1j * (b.imag / safe)


def _extremize_rows(b: np.ndarray, q: float) -> np.ndarray:
    """Row-wise alpha with ||alpha||_p = 1 and sum alpha_j b_j = ||b||_q.

    Zero rows map to zero rows.
    """
    mod = np.abs(b)
    phase = _phases(b, mod)
    if q == 1.0:
        return phase
    if math.isinf(q):
        out = np.zeros_like(phase)
        rows = np.arange(b.shape[0])
        top = np.argmax(mod, axis=1)
        out[rows, top] = phase[rows, top]
        return out
    top = mod.max(axis=1, keepdims=True)
    t = mod / np.where(top > 0, top, 1.0)
    if q == 2.0:
        weight = t
        total = np.sqrt(np.sum(t * t, axis=1, keepdims=True))
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            weight = np.where(t > 0, t ** (q - 1.0), 0.0)
        total = np.sum(t**q, axis=1, keepdims=True) ** (1.0 - 1.0 / q)
    total = np.where(total > 0, total, 1.0)
    return phase * weight / total


def holder_extremizer(beta, q) -> np.ndarray:
    """alpha_j = conj(b_j) |b_j|^(q-2) / (sum |b_k|^q)^(1/p) for 1 < q < inf."""
    q = as_exponent(q)
    if q == 1.0 or math.isinf(q):
        raise ValueError("q in {1, inf}: use extremizer_boundary")
    beta = np.asarray(beta)
    if beta.ndim != 1 or not np.any(beta != 0):
        raise ValueError("extremizer undefined for the zero vector")
    return _extremize_rows(beta[None, :], q)[0]


def extremizer_boundary(beta, q) -> np.ndarray:
    """Phase vector (q = 1) or single-support vector at the first max (q = inf)."""
    q = as_exponent(q)
    if not (q == 1.0 or math.isinf(q)):
        raise ValueError("extremizer_boundary handles q = 1 and q = inf only")
    beta = np.asarray(beta)
    if beta.ndim != 1 or not np.any(beta != 0):
        raise ValueError("extremizer undefined for the zero vector")
    return _extremize_rows(beta[None, :], q)[0]


def extremizer(beta, q) -> np.ndarray:
    q = as_exponent(q)
    if q == 1.0 or math.isinf(q):
        return extremizer_boundary(beta, q)
    return holder_extremizer(beta, q)


def _normalize_rows(a: np.ndarray, p: float) -> np.ndarray:
    norms = _pnorm_rows(a, p)
    return a / np.where(norms > 0, norms, 1.0)[:, None]


# ---------------------------------------------------------------------------
# exact routes
# ---------------------------------------------------------------------------


def _top_eigvec(gram: np.ndarray) -> np.ndarray:
    """Dominant eigenvector of a Hermitian PSD matrix by power iteration.

    Repeated squaring of the trace-normalised matrix runs the power method
    at exponent 2^k; a few plain power steps polish the result.
    """
    n = gram.shape[0]
    scale = float(np.trace(gram).real)
    start = np.zeros(n, dtype=gram.dtype)
    start[0] = 1.0
    if n == 1 or scale <= 0.0:
        return start
    a = gram / scale
    for _ in range(64):
        a2 = a @ a
        tr = float(np.trace(a2).real)
        if tr <= 0.0:
            break
        a2 = a2 / tr
        a2 = 0.5 * (a2 + a2.conj().T)
        done = np.max(np.abs(a2 - a)) <= 1e-15
        a = a2
        if done:
            break
    j = int(np.argmax(np.linalg.norm(a, axis=0)))
    v = a[:, j]
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return start
    v = v / nv
    rho = float(np.real(np.vdot(v, gram @ v)))
    for _ in range(200):
        w = gram @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            break
        v = w / nw
        new = float(np.real(np.vdot(v, gram @ v)))
        if abs(new - rho) <= 1e-16 * max(new, 1e-300):
            break
        rho = new
    return v


def _spectral(x: TupleX) -> tuple[float, np.ndarray]:
    data = x.data
    gram = np.conj(data) @ data.T
    lam = _top_eigvec(gram)
    if x.space.field == "real":
        lam = np.real(lam)
    return ground_norm(combine(x, lam), x.space), lam


def gram_sigma_max(x: TupleX) -> float:
    """Largest singular value of the matrix with columns x_j (Euclidean ground)."""
    if not x.space.is_euclidean:
        raise MethodMismatchError("spectral route needs a Euclidean (s = 2) ground space")
    return _spectral(x)[0]


def _sign_patterns(n: int) -> np.ndarray:
    k = n - 1
    idx = np.arange(1 << k, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(k, dtype=np.int64)) & 1
    signs = np.ones((1 << k, n))
    signs[:, 1:] = 1.0 - 2.0 * bits
    return signs


def _sign_enum(x: TupleX) -> tuple[float, np.ndarray]:
    signs = _sign_patterns(x.n)
    vals = _pnorm_rows(signs @ x.data, x.space.ground_exponent)
    i = int(np.argmax(vals))
    lam = signs[i]
    return ground_norm(combine(x, lam), x.space), lam


# ---------------------------------------------------------------------------
# grid oracle
# ---------------------------------------------------------------------------


def _grid_directions(n: int, complex_field: bool, resolution: int) -> np.ndarray:
    if n == 1:
        return np.ones((1, 1))
    if not complex_field and n == 2:
        th = 2.0 * np.pi * np.arange(resolution) / resolution
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    if not complex_field and n == 3:
        half = max(resolution // 2, 1)
        th = np.pi * np.arange(half + 1) / half
        ph = 2.0 * np.pi * np.arange(resolution) / resolution
        T, P = np.meshgrid(th, ph, indexing="ij")
        return np.stack(
            [(np.sin(T) * np.cos(P)).ravel(), (np.sin(T) * np.sin(P)).ravel(), np.cos(T).ravel()],
            axis=1,
        )
    if complex_field and n == 2:
        # global phase fixed on the first coefficient; the norm is phase invariant
        quarter = max(resolution // 4, 1)
        th = 0.5 * np.pi * np.arange(quarter + 1) / quarter
        ph = 2.0 * np.pi * np.arange(resolution) / resolution
        T, P = np.meshgrid(th, ph, indexing="ij")
        return np.stack([np.cos(T).ravel() + 0j, (np.sin(T) * np.exp(1j * P)).ravel()], axis=1)
    raise ValueError("grid oracle supports n <= 3 (real) or n <= 2 (complex)")


def _grid(x: TupleX, q: float, resolution: int) -> tuple[float, np.ndarray]:
    complex_field = x.space.field == "complex"
    if x.n > (2 if complex_field else 3):
        raise ValueError(
            f"grid oracle supports n <= {2 if complex_field else 3} for the {x.space.field} field, got n = {x.n}"
        )
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    p = conjugate_exponent(q)
    dirs = _normalize_rows(_grid_directions(x.n, complex_field, resolution), p)
    best, best_lam = -1.0, dirs[0]
    for start in range(0, dirs.shape[0], GRID_CHUNK):
        chunk = dirs[start : start + GRID_CHUNK]
        vals = _pnorm_rows(chunk @ x.data, x.space.ground_exponent)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, best_lam = float(vals[i]), chunk[i]
    return ground_norm(combine(x, best_lam), x.space), best_lam


def grid_oracle(x: TupleX, q, resolution: int = 720) -> float:
    """Brute-force lower bound: max over a deterministic grid of the p-sphere."""
    return _grid(x, as_exponent(q), resolution)[0]


# ---------------------------------------------------------------------------
# ascent
# ---------------------------------------------------------------------------


@dataclass
class _AscentOutcome:
    value: float
    witness: np.ndarray
    iterations: int
    dual_lower: float


def _ascent(x: TupleX, q: float, cfg: OptimizerConfig) -> _AscentOutcome:
    data = x.data
    n, m = data.shape
    field_ = x.space.field
    s, s_dual = x.space.ground_exponent, x.space.dual_exponent
    p = conjugate_exponent(q)
    dtype = x.space.dtype

    starts = [np.eye(n, dtype=dtype)]
    dual_lower = 0.0
    for r in range(cfg.restarts):
        st = Stream(cfg.seed, stream_id(ASCENT, r))
        starts.append(st.field_normal((1, n), field_))
        f = _normalize_rows(st.field_normal((1, m), field_), s_dual)
        b = f @ data.T
        dual_lower = max(dual_lower, float(_pnorm_rows(b, q)[0]))
        if np.any(b != 0):
            starts.append(_extremize_rows(b, q))
    if x.space.is_euclidean and q <= 2.0 and n > 1:
        starts.append(_spectral(x)[1][None, :])
    lam = _normalize_rows(np.vstack(starts).astype(dtype, copy=False), p)

    cur = _pnorm_rows(lam @ data, s)
    best = cur.copy()
    best_lam = lam.copy()
    radius = np.ones(lam.shape[0])
    noise = Stream(cfg.seed, stream_id(PERTURB, 0))
    history = [float(best.max())]
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        u = lam @ data
        f = _extremize_rows(u, s)
        b = f @ data.T
        live = np.any(f != 0, axis=1)
        if np.any(live):
            dual_lower = max(dual_lower, float(_pnorm_rows(b[live], q).max()))
        step = _extremize_rows(b, q)
        moved = np.any(step != 0, axis=1)
        nxt = np.where(moved[:, None], step, lam)
        val = _pnorm_rows(nxt @ data, s)
        settled = val <= cur * (1.0 + 1e-13)
        gain = val > best
        best = np.where(gain, val, best)
        best_lam = np.where(gain[:, None], nxt, best_lam)
        lam, cur = nxt, val
        if np.any(settled):
            # settled rows restart from a shrinking perturbation of their best point
            k = int(settled.sum())
            z = noise.field_normal((k, n), field_)
            trial = best_lam[settled] + radius[settled][:, None] * z
            trial = _normalize_rows(trial, p)
            lam = lam.copy()
            lam[settled] = trial
            cur = cur.copy()
            cur[settled] = _pnorm_rows(trial @ data, s)
            radius[settled] *= cfg.step_shrink
        history.append(float(best.max()))
        if len(history) > cfg.stall_window:
            old = history[-1 - cfg.stall_window]
            if history[-1] - old <= cfg.stall_tol * max(history[-1], 1e-300):
                break
    i = int(np.argmax(best))
    wit = best_lam[i]
    return _AscentOutcome(ground_norm(combine(x, wit), x.space), wit, it, dual_lower)


def dual_lower_bound(x: TupleX, q, cfg: OptimizerConfig | None = None) -> float:
    """Best dual objective found by the ascent: a lower bound from functionals alone."""
    cfg = cfg or OptimizerConfig()
    q = as_exponent(q)
    if not np.any(x.data != 0):
        return 0.0
    return _ascent(x, q, cfg).dual_lower


# ---------------------------------------------------------------------------
# dispatch and certification
# ---------------------------------------------------------------------------


def _unit(n: int, dtype) -> np.ndarray:
    e = np.zeros(n, dtype=dtype)
    e[0] = 1.0
    return e


def _closed_form_max(x: TupleX) -> tuple[float, np.ndarray]:
    norms = x.ground_norms()
    j = int(np.argmax(norms))
    lam = np.zeros(x.n, dtype=x.space.dtype)
    lam[j] = 1.0
    return tuple_pnorm(x, INF), lam


def auto_method(x: TupleX, q: float, cfg: OptimizerConfig) -> str:
    if math.isinf(q):
        return "closed_form_max"
    if q == 2.0 and x.space.is_euclidean:
        return "spectral"
    if q == 1.0 and x.space.field == "real" and x.n <= cfg.enum_threshold:
        return "sign_enum"
    return "ascent"


def _resolve(x: TupleX, q: float, method: str, cfg: OptimizerConfig) -> str:
    if method == "auto":
        return auto_method(x, q, cfg)
    if method == "closed_form":
        if not math.isinf(q):
            raise MethodMismatchError("closed form is available for q = inf only")
        return "closed_form_max"
    if method == "spectral":
        if q != 2.0 or not x.space.is_euclidean:
            raise MethodMismatchError("spectral route needs q = 2 and a Euclidean ground space")
        return "spectral"
    if method == "enum":
        if q != 1.0 or x.space.field != "real":
            raise MethodMismatchError("sign enumeration needs q = 1 over the reals")
        if x.n > max(cfg.enum_threshold, ENUM_HARD_LIMIT):
            raise MethodMismatchError(f"sign enumeration limited to n <= {ENUM_HARD_LIMIT}")
        return "sign_enum"
    if method == "grid":
        limit = 2 if x.space.field == "complex" else 3
        if x.n > limit:
            raise MethodMismatchError(f"grid oracle limited to n <= {limit} for the {x.space.field} field")
        return "phase_grid" if x.space.field == "complex" else "grid"
    if method == "ascent":
        return "ascent"
    raise ValueError(f"unknown method {method!r}")


def _envelope_uppers(x: TupleX, q: float, exact: dict[float, float]) -> list[tuple[float, str]]:
    """Upper bounds for hypo(x, q) from relaxations and exactly known hypo norms."""
    n = x.n
    out = [(tuple_pnorm(x, q), "tuple_pnorm")]
    for r, h in exact.items():
        if r == q:
            continue
        if r > q:
            # hypo_q <= n^((r-q)/(rq)) hypo_r
            expo = 1.0 / q if math.isinf(r) else (r - q) / (r * q)
            out.append((n**expo * h, f"envelope_r={r:g}"))
        else:
            # hypo_q <= hypo_r for q >= r
            out.append((h, f"monotone_r={r:g}"))
    return out


def _exact_side_values(x: TupleX, q: float, cfg: OptimizerConfig, with_enum: bool) -> dict[float, float]:
    vals: dict[float, float] = {INF: tuple_pnorm(x, INF)}
    if x.space.is_euclidean and q != 2.0 and x.n > 1:
        vals[2.0] = _spectral(x)[0]
    if with_enum and q != 1.0 and x.space.field == "real" and 1 < x.n <= cfg.enum_threshold:
        vals[1.0] = _sign_enum(x)[0]
    return vals


def _assemble(
    x: TupleX, q: float, tag: str, lower: float, lam, iterations: int, dual: float | None,
    exact_values: dict[float, float], certified: bool,
) -> HypoNormResult:
    if not math.isfinite(lower):
        raise ArithmeticError(f"non-finite lower bound {lower!r} from {tag}")
    if tag in EXACT_METHODS:
        return HypoNormResult(
            lower, lower, lam, tag, q, iterations, EXACT_TOL, tag, dual, certified
        )
    cands = _envelope_uppers(x, q, exact_values)
    upper, source = min(cands, key=lambda c: c[0])
    if lower > upper:
        if lower - upper > 1e-12 * max(1.0, upper):
            raise ArithmeticError(
                f"lower bound {lower!r} exceeds certified upper {upper!r} ({source})"
            )
        upper = lower
    return HypoNormResult(lower, upper, lam, tag, q, iterations, 0.0, source, dual, certified)


def _compute(x: TupleX, q, cfg: OptimizerConfig | None, method: str, certified: bool) -> HypoNormResult:
    cfg = cfg or OptimizerConfig()
    q = as_exponent(q)
    tag = _resolve(x, q, method, cfg)
    if not np.any(x.data != 0):
        return HypoNormResult(0.0, 0.0, _unit(x.n, x.space.dtype), tag, q, 0,
                              EXACT_TOL if tag in EXACT_METHODS else 0.0, "zero_tuple", 0.0, certified)
    dual = None
    iterations = 0
    if tag == "closed_form_max":
        lower, lam = _closed_form_max(x)
    elif tag == "spectral":
        lower, lam = _spectral(x)
        iterations = 1
    elif tag == "sign_enum":
        lower, lam = _sign_enum(x)
        iterations = 1 << (x.n - 1)
    elif tag in ("grid", "phase_grid"):
        lower, lam = _grid(x, q, cfg.grid_resolution)
    else:
        out = _ascent(x, q, cfg)
        lower, lam, iterations, dual = out.value, out.witness, out.iterations, out.dual_lower
    exact_values = {} if tag in EXACT_METHODS else _exact_side_values(x, q, cfg, with_enum=certified)
    return _assemble(x, q, tag, lower, lam, iterations, dual, exact_values, certified)


def hypo_norm(x: TupleX, q, cfg: OptimizerConfig | None = None, method: str = "auto") -> HypoNormResult:
    """Hypo-q-norm of ``x`` as an interval ``[lower, upper]`` with a witness."""
    return _compute(x, q, cfg, method, certified=False)


def certify(x: TupleX, q, cfg: OptimizerConfig | None = None, method: str = "auto") -> HypoNormResult:
    """Like :func:`hypo_norm` with every available upper envelope applied."""
    return _compute(x, q, cfg, method, certified=True)


class HypoCache:
    """Memoised certified hypo norms of one tuple, keyed by exponent."""

    def __init__(self, x: TupleX, cfg: OptimizerConfig | None = None):
        self.x = x
        self.cfg = cfg or OptimizerConfig()
        self._store: dict[float, HypoNormResult] = {}

    def __call__(self, q) -> HypoNormResult:
        q = as_exponent(q)
        if q not in self._store:
            self._store[q] = certify(self.x, q, self.cfg)
        return self._store[q]

    def widened(self, factor: float) -> "HypoCache":
        """Copy whose inexact intervals are stretched by ``factor`` on both sides (testing aid)."""
        out = HypoCache(self.x, self.cfg)
        for q, r in self._store.items():
            if r.exact:
                out._store[q] = r
            else:
                pad = factor * max(r.upper, 1e-300)
                out._store[q] = replace(r, lower=max(r.lower - pad, 0.0), upper=r.upper + pad)
        return out
