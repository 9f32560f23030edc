"""Seeded fuzz loops for the scalar lemmas and the tuple-level suite.

Instance ``i`` of a run with seed ``S`` draws from its own stream, so any
single instance can be replayed without running the ones before it, and
results do not depend on how instances are spread over worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .bounds import DEFAULT_EXPONENTS, SUITE_GROUPS, run_full_suite
from .engine import OptimizerConfig
from .instances import DISTRIBUTIONS, Corpus, CorpusEntry, GenSpec, _dump, gen_tuple
from .lemmas import GRUSS_VARIANTS, LEMMA_IDS, REL_TOL, run_lemma
from .rng import FUZZ, LEMMA, MASK64, Stream, stream_id

MAX_LEMMA_N = 20
# bulk runs trade a little ascent effort for throughput; verdicts stay sound
FUZZ_RESTARTS = 8
FUZZ_STALL_WINDOW = 8


def fuzz_config(seed: int) -> OptimizerConfig:
    return OptimizerConfig(restarts=FUZZ_RESTARTS, stall_window=FUZZ_STALL_WINDOW, seed=seed)


# ---------------------------------------------------------------------------
# scalar lemma inputs
# ---------------------------------------------------------------------------


def _interior(st: Stream, size: int) -> np.ndarray:
    """Positions in [0, 1] with the endpoints hit on purpose a quarter of the time each."""
    t = st.uniform(size)
    pick = st.uniform(size)
    t[pick < 0.25] = 0.0
    t[pick > 0.75] = 1.0
    return t


def _in_range(st: Stream, lo: float, hi: float, size: int) -> np.ndarray:
    t = _interior(st, size)
    out = lo + t * (hi - lo)
    out[t == 0.0] = lo
    out[t == 1.0] = hi
    return np.clip(out, lo, hi)


def _range(st: Stream, positive: bool = False) -> tuple[float, float]:
    u = st.normal(2)
    if positive:
        lo = 0.05 + 2.0 * abs(u[0])
    else:
        lo = 3.0 * u[0]
    hi = lo + 2.0 * abs(u[1])
    if st.uniform(1)[0] < 0.1:
        hi = lo
    return float(lo), float(hi)


def lemma_instance(lemma_id: str, seed: int, index: int) -> dict:
    """Valid random input for ``lemma_id`` as keyword arguments of :func:`run_lemma`."""
    if lemma_id not in LEMMA_IDS:
        raise KeyError(lemma_id)
    k = LEMMA_IDS.index(lemma_id)
    st = Stream(seed, stream_id(LEMMA, (k << 24) | index))
    low = 2 if lemma_id == "gruss_fd" else 1
    n = st.integer(low, MAX_LEMMA_N + 1)

    if lemma_id == "reverse_cbs":
        a, A = _range(st)
        y = 0.1 + 2.0 * st.uniform(n)
        c = _in_range(st, a, A, n)
        w = 0.05 + 3.0 * st.uniform(n)
        return {"a": (c * y).tolist(), "b": y.tolist(), "w": w.tolist(), "box": (a, A)}
    if lemma_id == "shisha_mond_product":
        lo_a, hi_A = _range(st)
        lo_a, hi_A = abs(lo_a), abs(lo_a) + (hi_A - lo_a)
        lo_b, hi_B = _range(st, positive=True)
        a = _in_range(st, lo_a, hi_A, n)
        b = _in_range(st, lo_b, hi_B, n)
        return {"a": a.tolist(), "b": b.tolist(), "box": (lo_a, hi_A, lo_b, hi_B)}
    if lemma_id == "shisha_mond_sqrt":
        g0, g1 = _range(st, positive=True)
        if st.uniform(1)[0] < 0.2:
            g0 = 0.0
        b = 0.1 + 2.0 * st.uniform(n)
        a = _in_range(st, g0, g1, n) * b
        ratio = a / b
        # widen the ratio bounds by the rounding of a = r * b
        gamma = min(g0, float(ratio.min()))
        Gamma = max(g1, float(ratio.max()))
        return {"a": a.tolist(), "b": b.tolist(), "box": (gamma, Gamma)}
    if lemma_id == "chebyshev":
        a = np.sort(np.round(st.normal(n), 1))
        b = np.sort(np.round(st.normal(n), 1))
        if st.uniform(1)[0] < 0.5:
            b = b[::-1].copy()
            a = a[::-1].copy()
        perm = st.permutation(n)
        return {"a": a[perm].tolist(), "b": b[perm].tolist()}
    if lemma_id == "biernacki":
        lo_a, hi_A = _range(st)
        lo_b, hi_B = _range(st)
        a = _in_range(st, lo_a, hi_A, n)
        b = _in_range(st, lo_b, hi_B, n)
        return {"a": a.tolist(), "b": b.tolist(), "box": (lo_a, hi_A, lo_b, hi_B)}
    # gruss_fd
    variant = GRUSS_VARIANTS[st.integer(0, len(GRUSS_VARIANTS))]
    a, b = st.normal(n), st.normal(n)
    if st.uniform(1)[0] < 0.2:
        b = a.copy()
    kw = {"a": a.tolist(), "b": b.tolist(), "variant": variant}
    if variant == "holder":
        kw["alpha"] = float(1.05 + 4.0 * st.uniform(1)[0])
    return kw


def _relative(report) -> float:
    return report.slack / max(1.0, abs(report.rhs))


@dataclass
class LemmaFuzzSummary:
    lemma_id: str
    count: int
    seed: int
    violations: int = 0
    worst_relative_slack: float = math.inf
    worst_index: int = -1
    failures: list[int] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "record": "fuzz_summary",
            "mode": "lemma",
            "lemma_id": self.lemma_id,
            "count": self.count,
            "seed": self.seed,
            "violations": self.violations,
            "worst_relative_slack": self.worst_relative_slack,
            "worst_index": self.worst_index,
            "failures": self.failures[:20],
        }


def fuzz_lemma(lemma_id: str, count: int, seed: int = 0) -> LemmaFuzzSummary:
    out = LemmaFuzzSummary(lemma_id, count, seed)
    for i in range(count):
        kw = lemma_instance(lemma_id, seed, i)
        rep = run_lemma(lemma_id, **kw)
        rel = _relative(rep)
        if rel < out.worst_relative_slack:
            out.worst_relative_slack, out.worst_index = rel, i
        lower_ok = rep.lower_slack is None or rep.lower_slack >= -REL_TOL * max(1.0, abs(rep.rhs))
        if not (rep.holds and lower_ok):
            out.violations += 1
            out.failures.append(i)
    return out


def dump_lemma_failure(path, lemma_id: str, seed: int, index: int) -> Path:
    """Write the failing lemma input as a replay file."""
    path = Path(path)
    doc = {"format": "hyponorm-lemma-replay", "version": "1", "lemma_id": lemma_id,
           "seed": seed, "index": index, "input": lemma_instance(lemma_id, seed, index)}
    path.write_text(_dump(doc) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# suite fuzzing
# ---------------------------------------------------------------------------

GROUND_EXPONENTS = (1.0, 2.0, math.inf)


def suite_spec(seed: int, index: int) -> GenSpec:
    """Generator spec of suite-fuzz instance ``index``."""
    st = Stream(seed, stream_id(FUZZ, index))
    n = st.integer(1, 7)
    m = st.integer(1, 9)
    fld = "complex" if st.integer(0, 2) else "real"
    s = GROUND_EXPONENTS[st.integer(0, 3)]
    dist = DISTRIBUTIONS[st.integer(0, len(DISTRIBUTIONS))]
    k = st.integer(1, m + 1) if dist == "sparse" else None
    gen_seed = int(st.words(1)[0]) & MASK64
    return GenSpec(gen_seed, n, m, fld, s, dist, k)


def suite_instance(seed: int, index: int, exponents=DEFAULT_EXPONENTS,
                   groups: Iterable[str] = SUITE_GROUPS) -> dict:
    spec = suite_spec(seed, index)
    x = gen_tuple(spec)
    report = run_full_suite(x, exponents, fuzz_config(seed), seed=spec.seed, groups=groups)
    checked = [r for r in report.records if r.verdict != "inconclusive"]
    worst = min((r.relative_slack for r in checked), default=math.inf)
    return {
        "record": "fuzz_instance",
        "index": index,
        "spec": spec.as_dict(),
        "counts": report.counts,
        "violated": [r.id for r in report.violated],
        "worst_relative_slack": worst,
    }


def _suite_chunk(args) -> list[dict]:
    seed, lo, hi, exponents, groups = args
    return [suite_instance(seed, i, exponents, groups) for i in range(lo, hi)]


def fuzz_suite(count: int, seed: int = 0, jobs: int = 1, exponents=DEFAULT_EXPONENTS,
               groups: Iterable[str] = SUITE_GROUPS) -> list[dict]:
    """Per-instance records in index order, whatever the number of workers."""
    groups = tuple(groups)
    exponents = tuple(exponents)
    if jobs <= 1 or count < 2:
        return _suite_chunk((seed, 0, count, exponents, groups))
    size = max(1, math.ceil(count / (4 * jobs)))
    chunks = [(seed, lo, min(lo + size, count), exponents, groups) for lo in range(0, count, size)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_suite_chunk, chunks))
    return [rec for part in parts for rec in part]


def suite_summary(records: list[dict], seed: int) -> dict:
    totals = {"verified": 0, "inconclusive": 0, "violated": 0}
    for r in records:
        for k, v in r["counts"].items():
            totals[k] += v
    bad = [r["index"] for r in records if r["violated"]]
    return {
        "record": "fuzz_summary",
        "mode": "suite",
        "count": len(records),
        "seed": seed,
        "violations": totals["violated"],
        "violating_instances": bad[:20],
        "counts": totals,
        "worst_relative_slack": min((r["worst_relative_slack"] for r in records), default=math.inf),
    }


def dump_suite_failures(path, records: list[dict], seed: int) -> Path | None:
    """Write the violating instances as a corpus for replay; ``None`` if there are none."""
    bad = [r for r in records if r["violated"]]
    if not bad:
        return None
    specs = [GenSpec.from_dict(r["spec"]) for r in bad]
    corpus = Corpus([CorpusEntry(gen_tuple(s), s) for s in specs],
                    {"source": "fuzz --suite", "seed": seed, "indices": [r["index"] for r in bad]})
    return corpus.save(path)
