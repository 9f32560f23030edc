"""Tuple-level inequalities between hypo norms, judged direction-safely.

Each inequality is written as ``sum(lhs terms) <= sum(rhs terms)`` where the
terms are functions of a few *factors* (hypo norms known as intervals, or
exact quantities such as ``||x||_{n,inf}``).  Every term is monotone in each
factor, so the extremes of ``rhs - lhs`` over the factor box are attained
at its corners:

* ``verified``   - the inequality holds at the least favourable corner;
* ``violated``   - it fails even at the most favourable corner;
* ``inconclusive`` otherwise.

Tolerances are relative to the sum of the absolute values of all terms, so
cancellation in differences of hypo norms is judged at the scale of the
norms themselves.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from hyponorm.engine import HypoCache, OptimizerConfig
from hyponorm.linalg import (
    INF,
    TupleX,
    as_exponent,
    conjugate_exponent,
    format_exponent,
    forward_difference,
    tuple_pnorm,
)

SUITE_TOL = 1e-9
ABS_FLOOR = 1e-12
VERDICTS = ("verified", "inconclusive", "violated")
DEFAULT_EXPONENTS = (1.0, 1.5, 2.0, 3.0, INF)
LOG_POWER_THRESHOLD = 16.0
SUITE_GROUPS = ("sandwich", "monotone", "reverse", "gruss", "fd")

Terms = Callable[[dict], Sequence[float]]


@dataclass(frozen=True)
class Factor:
    name: str
    lo: float
    hi: float
    method: str

    @property
    def exact(self) -> bool:
        return self.lo == self.hi


@dataclass(frozen=True)
class InequalityRecord:
    id: str
    anchor: str
    lhs: float
    rhs: float
    slack: float
    scale: float
    verdict: str
    provenance: dict = field(default_factory=dict)

    @property
    def relative_slack(self) -> float:
        return self.slack / max(self.scale, ABS_FLOOR)

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "anchor": self.anchor,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "scale": self.scale,
            "verdict": self.verdict,
            "provenance": self.provenance,
        }


@dataclass(frozen=True)
class SuiteReport:
    descriptor: dict
    records: tuple[InequalityRecord, ...]

    @property
    def counts(self) -> dict[str, int]:
        out = {v: 0 for v in VERDICTS}
        for r in self.records:
            out[r.verdict] += 1
        return out

    @property
    def violated(self) -> list[InequalityRecord]:
        return [r for r in self.records if r.verdict == "violated"]

    def as_dict(self) -> dict:
        return {
            "descriptor": self.descriptor,
            "counts": self.counts,
            "records": [r.as_dict() for r in self.records],
        }


def power(base: float, e: float) -> float:
    """``base ** e`` for base >= 0, via logarithms for large exponents."""
    if e == 0:
        return 1.0
    if base == 0.0:
        return 0.0
    if e > LOG_POWER_THRESHOLD:
        try:
            return math.exp(e * math.log(base))
        except OverflowError:
            return math.inf
    return base**e


def judge(rid: str, anchor: str, factors: Iterable[Factor], lhs: Terms, rhs: Terms) -> InequalityRecord:
    """Direction-safe verdict for ``sum lhs(v) <= sum rhs(v)`` over factor intervals."""
    table = {f.name: f for f in factors}
    names = sorted(table)
    loose = [k for k in names if not table[k].exact]
    base = {k: table[k].lo for k in names}
    evaluated = []
    for ends in itertools.product((0, 1), repeat=len(loose)):
        vals = dict(base)
        for k, e in zip(loose, ends):
            vals[k] = table[k].hi if e else table[k].lo
        lt, rt = list(lhs(vals)), list(rhs(vals))
        left, right = math.fsum(lt), math.fsum(rt)
        scale = math.fsum(abs(t) for t in lt + rt)
        evaluated.append((right - left, left, right, scale, ends))
    worst = min(evaluated, key=lambda e: e[0])
    best = max(evaluated, key=lambda e: e[0])

    def tol(e):
        return max(SUITE_TOL * e[3], ABS_FLOOR)

    if worst[0] >= -tol(worst):
        verdict = "verified"
    elif best[0] < -tol(best):
        verdict = "violated"
    else:
        verdict = "inconclusive"
    provenance = {}
    for k in names:
        f = table[k]
        if f.exact:
            end = "exact"
        else:
            end = "upper" if worst[4][loose.index(k)] else "lower"
        provenance[k] = {"method": f.method, "end": end, "interval": [f.lo, f.hi]}
    slack, left, right, scale, _ = worst
    return InequalityRecord(rid, anchor, left, right, slack, scale, verdict, provenance)


class SuiteContext:
    """Shared hypo-norm intervals of ``x`` and of its forward difference."""

    def __init__(self, x: TupleX, cfg: OptimizerConfig | None = None):
        self.x = x
        self.cfg = cfg or OptimizerConfig()
        self.n = x.n
        self.sup = tuple_pnorm(x, INF)
        self._hx = HypoCache(x, self.cfg)
        self._hd: HypoCache | None = None
        self._dsup: float | None = None

    def _factor(self, cache: HypoCache, prefix: str, q: float) -> Factor:
        r = cache(q)
        return Factor(f"{prefix}[{format_exponent(q)}]", r.lower, r.upper, r.method)

    def h(self, q) -> Factor:
        return self._factor(self._hx, "H", as_exponent(q))

    def _diff_cache(self) -> HypoCache:
        if self._hd is None:
            self._hd = HypoCache(forward_difference(self.x), self.cfg)
        return self._hd

    def dh(self, q) -> Factor:
        return self._factor(self._diff_cache(), "DH", as_exponent(q))

    @property
    def diff_sup(self) -> float:
        if self._dsup is None:
            self._dsup = tuple_pnorm(forward_difference(self.x), INF)
        return self._dsup

    def widened(self, factor: float) -> "SuiteContext":
        out = SuiteContext(self.x, self.cfg)
        out._hx = self._hx.widened(factor)
        if self._hd is not None:
            out._hd = self._hd.widened(factor)
        return out


def _ctx(x: TupleX, cfg, ctx) -> SuiteContext:
    return ctx if ctx is not None else SuiteContext(x, cfg)


def check_sandwich(x: TupleX, q, cfg=None, ctx=None) -> list[InequalityRecord]:
    """``n^(-1/q) ||x||_{n,q} <= hypo_q(x) <= ||x||_{n,q}``."""
    c = _ctx(x, cfg, ctx)
    q = as_exponent(q)
    H = c.h(q)
    plain = tuple_pnorm(x, q)
    shrink = 1.0 if math.isinf(q) else c.n ** (-1.0 / q)
    tag = format_exponent(q)
    return [
        judge(f"sandwich.lower[q={tag}]", "hypo-q vs tuple q-norm, lower",
              [H], lambda v: [shrink * plain], lambda v: [v[H.name]]),
        judge(f"sandwich.upper[q={tag}]", "hypo-q vs tuple q-norm, upper",
              [H], lambda v: [v[H.name]], lambda v: [plain]),
    ]


def monotone_exponent(q: float, r: float) -> float:
    """``(r - q) / (rq)`` with ``r = inf`` giving ``1/q``."""
    if r < q:
        raise ValueError(f"need r >= q, got q={q}, r={r}")
    if q == r:
        return 0.0
    if math.isinf(r):
        return 1.0 / q
    return (r - q) / (r * q)


def check_q_monotonicity(x: TupleX, q, r, cfg=None, ctx=None) -> list[InequalityRecord]:
    """``hypo_r <= hypo_q <= n^((r-q)/(rq)) hypo_r`` for ``r >= q >= 1``."""
    q, r = as_exponent(q), as_exponent(r)
    if r < q:
        raise ValueError(f"need r >= q, got q = {q}, r = {r}")
    c = _ctx(x, cfg, ctx)
    Hq, Hr = c.h(q), c.h(r)
    grow = c.n ** monotone_exponent(q, r)
    tag = f"q={format_exponent(q)},r={format_exponent(r)}"
    return [
        judge(f"monotone.lower[{tag}]", "hypo norms decrease in the exponent",
              [Hq, Hr], lambda v: [v[Hr.name]], lambda v: [v[Hq.name]]),
        judge(f"monotone.upper[{tag}]", "hypo norms reverse monotonicity envelope",
              [Hq, Hr], lambda v: [v[Hq.name]], lambda v: [grow * v[Hr.name]]),
    ]


def check_reverse_bounds(x: TupleX, cfg=None, ctx=None) -> list[InequalityRecord]:
    """Reverse bounds between the hypo-Euclidean norm and the hypo-1 norm.

    Upper bounds ``n/4 R^2``, ``hypo_1 R`` and ``sqrt(n)/4 R`` with
    ``R = ||x||_{n,inf}``, plus the two lower bounds ``0 <= ...``.
    """
    c = _ctx(x, cfg, ctx)
    n, R = c.n, c.sup
    He, H1 = c.h(2.0), c.h(1.0)
    e, o = He.name, H1.name
    fs = [He, H1]

    def sq_gap(v):
        return [v[e] ** 2, -(v[o] ** 2) / n]

    def lin_gap(v):
        return [v[e], -v[o] / math.sqrt(n)]

    return [
        judge("reverse.quarter.lower", "hypo-Euclidean squared gap is nonnegative", fs, lambda v: [], sq_gap),
        judge("reverse.quarter.upper", "reverse Cauchy-Schwarz bound n R^2 / 4", fs, sq_gap,
              lambda v: [0.25 * n * R * R]),
        judge("reverse.product.upper", "Shisha-Mond bound hypo_1 R", fs, sq_gap,
              lambda v: [v[o] * R]),
        judge("reverse.sqrt.lower", "hypo-Euclidean linear gap is nonnegative", fs, lambda v: [], lin_gap),
        judge("reverse.sqrt.upper", "Shisha-Mond square-root bound sqrt(n) R / 4", fs, lin_gap,
              lambda v: [0.25 * math.sqrt(n) * R]),
    ]


def _finite(*exps):
    for e in exps:
        if math.isinf(e):
            raise ValueError("exponents must be finite")


def check_product_bounds(x: TupleX, q, r, cfg=None, ctx=None) -> list[InequalityRecord]:
    """``hypo_{q+r}^{q+r} <= hypo_q^q hypo_r^r / n + floor(n^2/4)/n R^{q+r}`` and the n/4 form."""
    q, r = as_exponent(q), as_exponent(r)
    _finite(q, r)
    c = _ctx(x, cfg, ctx)
    n, R = c.n, c.sup
    Hs, Hq, Hr = c.h(q + r), c.h(q), c.h(r)
    s = q + r
    fs = [Hs, Hq, Hr]
    tag = f"q={format_exponent(q)},r={format_exponent(r)}"

    def lhs(v):
        return [power(v[Hs.name], s)]

    def product(v):
        return power(v[Hq.name], q) * power(v[Hr.name], r) / n

    floor_c = ((n * n) // 4) / n
    return [
        judge(f"gruss.floor[{tag}]", "Grüss bound with floor(n^2/4)/n", fs, lhs,
              lambda v: [product(v), floor_c * power(R, s)]),
        judge(f"gruss.quarter[{tag}]", "Grüss bound with n/4", fs, lhs,
              lambda v: [product(v), 0.25 * n * power(R, s)]),
    ]


def check_forward_diff_bounds(x: TupleX, q, r, alpha=2.0, cfg=None, ctx=None) -> list[InequalityRecord]:
    """Forward-difference Grüss bounds: sup, Hölder(alpha, beta) and l1 branches."""
    q, r, alpha = as_exponent(q), as_exponent(r), as_exponent(alpha)
    _finite(q, r)
    if not 1.0 < alpha < INF:
        raise ValueError(f"need 1 < alpha < inf, got {alpha}")
    if x.n < 2:
        raise ValueError("forward-difference bounds need n >= 2")
    beta = conjugate_exponent(alpha)
    c = _ctx(x, cfg, ctx)
    n, R = c.n, c.sup
    s = q + r
    Hs, Hq, Hr = c.h(s), c.h(q), c.h(r)
    Da, Db, D1 = c.dh(alpha), c.dh(beta), c.dh(1.0)
    dsup = c.diff_sup
    lead = q * r * power(R, s - 2.0)
    tag = f"q={format_exponent(q)},r={format_exponent(r)}"

    def lhs(v):
        return [power(v[Hs.name], s), -power(v[Hq.name], q) * power(v[Hr.name], r) / n]

    base = [Hs, Hq, Hr]
    return [
        judge(f"fd.sup[{tag}]", "forward-difference Grüss bound, sup branch", base, lhs,
              lambda v: [(n * n - 1) * n / 12.0 * lead * dsup * dsup]),
        judge(f"fd.holder[{tag},alpha={format_exponent(alpha)}]",
              "forward-difference Grüss bound, Hölder branch", base + [Da, Db], lhs,
              lambda v: [(n * n - 1) / 6.0 * lead * v[Da.name] * v[Db.name]]),
        judge(f"fd.l1[{tag}]", "forward-difference Grüss bound, l1 branch", base + [D1], lhs,
              lambda v: [0.5 * (n - 1) * lead * v[D1.name] ** 2]),
    ]


def describe(x: TupleX, seed: int | None = None) -> dict:
    return {
        "n": x.n,
        "m": x.m,
        "field": x.space.field,
        "ground_exponent": format_exponent(x.space.ground_exponent),
        "seed": seed,
    }


def run_full_suite(x: TupleX, exponents: Sequence = DEFAULT_EXPONENTS, cfg: OptimizerConfig | None = None,
                   ctx: SuiteContext | None = None, seed: int | None = None,
                   groups: Iterable[str] = SUITE_GROUPS) -> SuiteReport:
    """Every tuple-level check over the exponent set, records sorted by id.

    ``groups`` restricts the run to a subset of :data:`SUITE_GROUPS`.
    """
    groups = set(groups)
    unknown = groups - set(SUITE_GROUPS)
    if unknown:
        raise ValueError(f"unknown check groups {sorted(unknown)}; expected a subset of {SUITE_GROUPS}")
    c = _ctx(x, cfg, ctx)
    exps = sorted({as_exponent(e) for e in exponents})
    finite = [e for e in exps if not math.isinf(e)]
    alphas = [e for e in finite if e > 1.0] or [2.0]
    records: dict[str, InequalityRecord] = {}

    def add(recs):
        for rec in recs:
            records.setdefault(rec.id, rec)

    if "sandwich" in groups:
        for q in exps:
            add(check_sandwich(x, q, ctx=c))
    if "monotone" in groups:
        for q, r in itertools.combinations(exps, 2):
            add(check_q_monotonicity(x, q, r, ctx=c))
    if "reverse" in groups:
        add(check_reverse_bounds(x, ctx=c))
    for q, r in itertools.combinations_with_replacement(finite, 2):
        if "gruss" in groups:
            add(check_product_bounds(x, q, r, ctx=c))
        if "fd" in groups and x.n >= 2:
            for a in alphas:
                add(check_forward_diff_bounds(x, q, r, a, ctx=c))
    ordered = tuple(records[k] for k in sorted(records))
    return SuiteReport(describe(x, c.cfg.seed if seed is None else seed), ordered)
