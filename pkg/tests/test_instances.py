import itertools
import json

import numpy as np
import pytest

from hyponorm.engine import hypo_norm
from hyponorm.instances import (
    WITNESS_CASES,
    Corpus,
    CorpusDimensionError,
    CorpusEntry,
    CorpusFormatError,
    CorpusVersionError,
    GenSpec,
    gen_equality_witness,
    gen_tuple,
    load_corpus,
    parse_genspec,
    save_corpus,
)
from hyponorm.lemmas import run_lemma
from hyponorm.linalg import INF, TupleX


class TestGenSpec:
    def test_parse(self):
        s = parse_genspec("duplicates,n=2,m=3,seed=7")
        assert (s.distribution, s.n, s.m, s.seed) == ("duplicates", 2, 3, 7)
        s = parse_genspec("sparse(2),m=5,field=complex,s=inf")
        assert (s.distribution, s.k, s.field, s.ground_exponent) == ("sparse", 2, "complex", INF)
        s = parse_genspec("rank_one,s=3/2")
        assert s.ground_exponent == 1.5

    @pytest.mark.parametrize("text", ["bogus", "gaussian,n=0", "sparse(4),m=3", "gaussian,k=1",
                                      "gaussian,seed=-1", "gaussian,foo=1", "gaussian,n=x",
                                      "gaussian,field=quaternion", "gaussian,s=0.5"])
    def test_invalid(self, text):
        with pytest.raises(ValueError):
            parse_genspec(text)

    def test_dict_round_trip(self):
        s = GenSpec(2**64 - 1, 4, 6, "complex", INF, "sparse", 3)
        assert GenSpec.from_dict(json.loads(json.dumps(s.as_dict()))) == s


class TestGeneration:
    @pytest.mark.parametrize("dist", ["gaussian", "uniform_ball", "sparse(2)", "rank_one", "duplicates"])
    @pytest.mark.parametrize("field", ["real", "complex"])
    def test_deterministic_and_shaped(self, dist, field):
        spec = parse_genspec(f"{dist},n=4,m=3,seed=11,field={field}")
        a, b = gen_tuple(spec), gen_tuple(spec)
        assert a == b and a.data.shape == (4, 3) and a.space.field == field
        assert gen_tuple(GenSpec(**{**spec.__dict__, "seed": 12})) != a

    def test_duplicates(self):
        x = gen_tuple(parse_genspec("duplicates,n=2,m=3,seed=7"))
        assert np.array_equal(x[0], x[1])

    def test_rank_one_minors_vanish(self):
        for field in ("real", "complex"):
            x = gen_tuple(parse_genspec(f"rank_one,n=3,m=4,seed=3,field={field}"))
            g = x.data.conj() @ x.data.T
            scale = np.max(np.abs(g))
            for i, j in itertools.combinations(range(3), 2):
                minor = g[i, i] * g[j, j] - g[i, j] * g[j, i]
                assert abs(minor) <= 1e-12 * scale**2

    def test_sparse_support(self):
        x = gen_tuple(parse_genspec("sparse(2),n=20,m=6,seed=1"))
        assert np.all(np.count_nonzero(x.data, axis=1) == 2)

    def test_uniform_ball_inside(self):
        for field in ("real", "complex"):
            x = gen_tuple(parse_genspec(f"uniform_ball,n=200,m=3,seed=2,field={field}"))
            assert np.all(np.linalg.norm(x.data, axis=1) <= 1.0)


class TestWitnesses:
    @pytest.mark.parametrize("case", [c for c in WITNESS_CASES if not c.startswith("sandwich")])
    def test_scalar_witness_slack_zero(self, case):
        w = gen_equality_witness(case)
        assert abs(run_lemma(w["lemma"], **w["kwargs"]).slack) <= 1e-12

    def test_tuple_witnesses(self):
        for case in ("sandwich_upper_dup", "sandwich_lower_orthonormal"):
            w = gen_equality_witness(case)
            assert hypo_norm(w["x"], w["q"]).lower == pytest.approx(w["value"], rel=1e-12)

    def test_orthonormal_gram_identity(self):
        x = gen_equality_witness("sandwich_lower_orthonormal", n=4)["x"]
        assert np.array_equal(x.data @ x.data.T, np.eye(4))

    def test_unknown(self):
        with pytest.raises(KeyError):
            gen_equality_witness("nope")


class TestCorpus:
    def _corpus(self):
        specs = [parse_genspec(f"gaussian,n=2,m=3,seed={i},field={f},s={s}")
                 for i, (f, s) in enumerate(itertools.product(("real", "complex"), ("1", "2", "inf")))]
        c = Corpus.from_specs(specs, {"note": "x", "ratio": 0.1, "nested": {"k": [1, 2.5]}})
        c.entries.append(CorpusEntry(TupleX.from_vectors([[-0.0, 1e-310], [5e300, -1.0]])))
        return c

    def test_round_trip(self, tmp_path):
        c = self._corpus()
        path = save_corpus(tmp_path / "a.hyponorm.json", c)
        back = load_corpus(path)
        assert back == c
        neg = back.entries[-1].x.data[0, 0]
        assert neg == 0.0 and np.signbit(neg)
        assert back.to_text() == c.to_text()

    def test_seventeen_digits(self):
        text = self._corpus().to_text()
        assert "0.10000000000000001" in text

    def test_empty(self, tmp_path):
        path = Corpus().save(tmp_path / "e.hyponorm.json")
        assert len(load_corpus(path)) == 0

    def _doc(self):
        return json.loads(self._corpus().to_text())

    def test_dimension_error_names_index(self):
        doc = self._doc()
        doc["entries"][3]["n"] = 5
        with pytest.raises(CorpusDimensionError) as e:
            Corpus.from_text(json.dumps(doc))
        assert e.value.index == 3 and "entry 3" in str(e.value)
        doc = self._doc()
        doc["entries"][1]["data"][0].append(1.0)
        with pytest.raises(CorpusDimensionError):
            Corpus.from_text(json.dumps(doc))
        doc = self._doc()
        doc["entries"][0]["spec"]["n"] = 3
        with pytest.raises(CorpusDimensionError):
            Corpus.from_text(json.dumps(doc))

    def test_version_error(self):
        doc = self._doc()
        doc["version"] = "99"
        with pytest.raises(CorpusVersionError):
            Corpus.from_text(json.dumps(doc))

    @pytest.mark.parametrize("text", ["{", "[]", '{"format": "other"}',
                                      '{"format": "hyponorm-corpus", "version": "1", "entries": 3}'])
    def test_format_errors(self, text):
        with pytest.raises(CorpusFormatError):
            Corpus.from_text(text)

    def test_bad_values(self):
        doc = self._doc()
        doc["entries"][0]["data"][0][0] = "abc"
        with pytest.raises(CorpusFormatError):
            Corpus.from_text(json.dumps(doc))
        doc = self._doc()
        doc["entries"][4]["data"][0][0] = 1.0
        with pytest.raises(CorpusFormatError):
            Corpus.from_text(json.dumps(doc))

    def test_entry_spec_consistency(self):
        with pytest.raises(ValueError):
            CorpusEntry(TupleX.from_vectors(np.eye(2)), parse_genspec("gaussian,n=3,m=2"))
