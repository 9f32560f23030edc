"""Scalar inequalities: reverse Cauchy-Schwarz, Shisha-Mond, Chebyshev, Grüss.

Every check returns a :class:`LemmaReport` holding the two sides of the
upper inequality, their slack ``rhs - lhs`` and the verdict.  Hypotheses
are verified first unless ``strict=False``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from hyponorm.linalg import as_exponent, conjugate_exponent

REL_TOL = 1e-10
SYNC_PAIRWISE_LIMIT = 1000

LEMMA_IDS = (
    "reverse_cbs",
    "shisha_mond_product",
    "shisha_mond_sqrt",
    "chebyshev",
    "biernacki",
    "gruss_fd",
)
GRUSS_VARIANTS = ("sup", "holder", "l1")


class PreconditionViolated(ValueError):
    """Input outside the lemma's hypotheses."""

    def __init__(self, message: str, index=None):
        super().__init__(message)
        self.index = index


class NotSynchronous(PreconditionViolated):
    pass


@dataclass(frozen=True)
class BoundBox:
    lo_a: float | None = None
    hi_A: float | None = None
    lo_b: float | None = None
    hi_B: float | None = None

    def __post_init__(self):
        for lo, hi in ((self.lo_a, self.hi_A), (self.lo_b, self.hi_B)):
            if lo is not None and hi is not None and lo > hi:
                raise ValueError(f"bound box has lo {lo} > hi {hi}")


@dataclass(frozen=True)
class LemmaReport:
    lemma_id: str
    lhs: float
    rhs: float
    slack: float
    holds: bool
    lower_slack: float | None = None
    lower_holds: bool | None = None
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "lemma": self.lemma_id,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "holds": self.holds,
            "lower_slack": self.lower_slack,
            "lower_holds": self.lower_holds,
            **({"details": self.details} if self.details else {}),
        }


def _holds(slack: float, rhs: float, tol: float = REL_TOL) -> bool:
    return slack >= -tol * max(1.0, abs(rhs))


def _report(lemma_id, lhs, rhs, lower=None, details=None) -> LemmaReport:
    lhs, rhs = float(lhs), float(rhs)
    slack = rhs - lhs
    lower_slack = None if lower is None else float(lower)
    return LemmaReport(
        lemma_id,
        lhs,
        rhs,
        slack,
        _holds(slack, rhs),
        lower_slack,
        None if lower is None else lower_slack >= -1e-12 * max(1.0, abs(lhs)),
        details or {},
    )


def _seq(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"{name} must be a non-empty sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _same_length(*arrays):
    if len({a.size for a in arrays}) != 1:
        raise ValueError("sequences must have equal length")


def _first_bad(mask: np.ndarray):
    bad = np.flatnonzero(~mask)
    return None if bad.size == 0 else int(bad[0])


PAIRWISE_LIMIT = 2048


def _gram_gap(u: np.ndarray, v: np.ndarray, w: np.ndarray | None = None) -> float:
    """``sum w u^2 * sum w v^2 - (sum w u v)^2``, pairwise (Lagrange) when affordable."""
    w = np.ones_like(u) if w is None else w
    if u.size <= PAIRWISE_LIMIT:
        cross = u[:, None] * v[None, :] - u[None, :] * v[:, None]
        return 0.5 * float(np.sum(w[:, None] * w[None, :] * cross * cross))
    return float(np.sum(w * u * u) * np.sum(w * v * v) - np.sum(w * u * v) ** 2)


def floor_quarter_square(n: int) -> int:
    """``floor(n^2 / 4)``, equal to ``floor(n/2) * (n - floor(n/2))``."""
    return (n * n) // 4


def reverse_cbs(z, y, w, box: BoundBox, strict: bool = True) -> LemmaReport:
    """Reverse Cauchy-Schwarz under ``a y_j <= z_j <= A y_j``, weights w > 0."""
    z, y, w = _seq(z, "z"), _seq(y, "y"), _seq(w, "w")
    _same_length(z, y, w)
    a, A = box.lo_a, box.hi_A
    if a is None or A is None:
        raise ValueError("reverse_cbs needs the box (a, A)")
    if strict:
        j = _first_bad(w > 0)
        if j is not None:
            raise PreconditionViolated(f"weight w[{j}] = {w[j]} is not positive", j)
        j = _first_bad((a * y <= z) & (z <= A * y))
        if j is not None:
            raise PreconditionViolated(f"a*y <= z <= A*y fails at index {j}", j)
    swy2 = np.sum(w * y * y)
    lhs = _gram_gap(z, y, w)
    rhs = 0.25 * (A - a) ** 2 * swy2**2
    return _report("reverse_cbs", lhs, rhs, lower=lhs)


def shisha_mond_product(a, b, box: BoundBox, strict: bool = True) -> LemmaReport:
    """``sum a^2 sum b^2 - (sum ab)^2 <= (sqrt(A/b) - sqrt(a/B))^2 sum ab sum b^2``."""
    a, b = _seq(a, "a"), _seq(b, "b")
    _same_length(a, b)
    lo_a, hi_A, lo_b, hi_B = box.lo_a, box.hi_A, box.lo_b, box.hi_B
    if None in (lo_a, hi_A, lo_b, hi_B):
        raise ValueError("shisha_mond_product needs the box (a, A, b, B)")
    if lo_b <= 0:
        raise PreconditionViolated(f"lower bound b = {lo_b} must be positive")
    if lo_a < 0 or hi_A < 0:
        raise PreconditionViolated(f"bounds a = {lo_a}, A = {hi_A} must be nonnegative")
    if strict:
        j = _first_bad((lo_a <= a) & (a <= hi_A))
        if j is not None:
            raise PreconditionViolated(f"a <= a_j <= A fails at index {j}", j)
        j = _first_bad((lo_b <= b) & (b <= hi_B))
        if j is not None:
            raise PreconditionViolated(f"b <= b_j <= B fails at index {j}", j)
    sab, sb2 = np.sum(a * b), np.sum(b * b)
    lhs = _gram_gap(a, b)
    rhs = (math.sqrt(hi_A / lo_b) - math.sqrt(lo_a / hi_B)) ** 2 * sab * sb2
    return _report("shisha_mond_product", lhs, rhs)


def shisha_mond_sqrt(a, b, gamma: float, Gamma: float, strict: bool = True) -> LemmaReport:
    """``sqrt(sum a^2 sum b^2) - sum ab <= (G-g)^2 / (4(g+G)) sum b^2``."""
    a, b = _seq(a, "a"), _seq(b, "b")
    _same_length(a, b)
    if gamma + Gamma <= 0:
        raise PreconditionViolated("degenerate ratio bounds gamma = Gamma = 0")
    if strict:
        if not 0 <= gamma <= Gamma < math.inf:
            raise PreconditionViolated(f"need 0 <= gamma <= Gamma < inf, got {gamma}, {Gamma}")
        j = _first_bad(b > 0)
        if j is not None:
            raise PreconditionViolated(f"b[{j}] = {b[j]} is not positive", j)
        j = _first_bad(a >= 0)
        if j is not None:
            raise PreconditionViolated(f"a[{j}] = {a[j]} is negative", j)
        ratio = a / b
        j = _first_bad((gamma <= ratio) & (ratio <= Gamma))
        if j is not None:
            raise PreconditionViolated(f"gamma <= a_j/b_j <= Gamma fails at index {j}", j)
    sb2 = np.sum(b * b)
    lhs = math.sqrt(np.sum(a * a) * sb2) - np.sum(a * b)
    rhs = (Gamma - gamma) ** 2 / (4.0 * (gamma + Gamma)) * sb2
    return _report("shisha_mond_sqrt", lhs, rhs, lower=lhs)


def check_synchronous(a: np.ndarray, b: np.ndarray):
    """Raise :class:`NotSynchronous` with an offending pair if a, b are not synchronous."""
    n = a.size
    if n > SYNC_PAIRWISE_LIMIT:
        # sufficient condition: both nondecreasing under a common ordering
        order = np.lexsort((b, a))
        if np.all(np.diff(b[order]) >= 0):
            return
    da = a[:, None] - a[None, :]
    db = b[:, None] - b[None, :]
    bad = np.argwhere(da * db < 0)
    if bad.size:
        j, k = (int(v) for v in bad[0])
        raise NotSynchronous(f"(a_j - a_k)(b_j - b_k) < 0 for pair ({j}, {k})", (j, k))


def chebyshev_sum(a, b, strict: bool = True) -> LemmaReport:
    """Chebyshev: mean(a) mean(b) <= mean(ab) for synchronous sequences."""
    a, b = _seq(a, "a"), _seq(b, "b")
    _same_length(a, b)
    if strict:
        check_synchronous(a, b)
    lhs = np.mean(a) * np.mean(b)
    rhs = np.mean(a * b)
    return _report("chebyshev", lhs, rhs)


def _gruss_gap(a: np.ndarray, b: np.ndarray) -> float:
    n = a.size
    if n <= PAIRWISE_LIMIT:
        # (1/2n^2) sum_{j,k} (a_j - a_k)(b_j - b_k) avoids cancellation in the means
        da = a[:, None] - a[None, :]
        db = b[:, None] - b[None, :]
        return abs(float(np.sum(da * db))) / (2.0 * n * n)
    return abs(np.mean(a * b) - np.mean(a) * np.mean(b))


def biernacki_gruss(a, b, box: BoundBox, strict: bool = True) -> LemmaReport:
    """Discrete Grüss inequality with the ``floor(n^2/4)/n^2`` constant."""
    a, b = _seq(a, "a"), _seq(b, "b")
    _same_length(a, b)
    lo_a, hi_A, lo_b, hi_B = box.lo_a, box.hi_A, box.lo_b, box.hi_B
    if None in (lo_a, hi_A, lo_b, hi_B):
        raise ValueError("biernacki needs the box (a, A, b, B)")
    if strict:
        j = _first_bad((lo_a <= a) & (a <= hi_A))
        if j is not None:
            raise PreconditionViolated(f"a <= a_j <= A fails at index {j}", j)
        j = _first_bad((lo_b <= b) & (b <= hi_B))
        if j is not None:
            raise PreconditionViolated(f"b <= b_j <= B fails at index {j}", j)
    n = a.size
    spread = (hi_A - lo_a) * (hi_B - lo_b)
    half = n // 2
    rhs_half = half * (1.0 - half / n) / n * spread
    rhs_floor = floor_quarter_square(n) / n**2 * spread
    rhs_quarter = 0.25 * spread
    rhs = min(rhs_half, rhs_floor, rhs_quarter)
    details = {"rhs_half": rhs_half, "rhs_floor": rhs_floor, "rhs_quarter": rhs_quarter}
    return _report("biernacki", _gruss_gap(a, b), rhs, details=details)


def gruss_forward_diff(a, b, variant: str = "sup", alpha=None) -> LemmaReport:
    """Grüss bounds via forward differences: ``sup``, ``holder`` (alpha) or ``l1``."""
    a, b = _seq(a, "a"), _seq(b, "b")
    _same_length(a, b)
    n = a.size
    if n < 2:
        raise ValueError("forward-difference bounds need n >= 2")
    da, db = np.diff(a), np.diff(b)
    details = {"variant": variant}
    if variant == "sup":
        rhs = (n * n - 1) / 12.0 * np.max(np.abs(da)) * np.max(np.abs(db))
    elif variant == "holder":
        if alpha is None:
            raise ValueError("holder variant needs alpha")
        alpha = as_exponent(alpha)
        if alpha <= 1.0 or math.isinf(alpha):
            raise ValueError(f"holder variant needs 1 < alpha < inf, got {alpha}")
        beta = conjugate_exponent(alpha)
        na = np.sum(np.abs(da) ** alpha) ** (1.0 / alpha)
        nb = np.sum(np.abs(db) ** beta) ** (1.0 / beta)
        rhs = (n * n - 1) / (6.0 * n) * na * nb
        details.update(alpha=alpha, beta=beta)
    elif variant == "l1":
        rhs = 0.5 * (1.0 - 1.0 / n) * np.sum(np.abs(da)) * np.sum(np.abs(db))
    else:
        raise ValueError(f"unknown variant {variant!r}; expected one of {GRUSS_VARIANTS}")
    return _report("gruss_fd", _gruss_gap(a, b), rhs, details=details)


def run_lemma(lemma_id: str, a: Sequence[float], b: Sequence[float], box: Sequence[float] = (),
              w: Sequence[float] | None = None, variant: str = "sup", alpha=None,
              strict: bool = True) -> LemmaReport:
    """Dispatch by lemma id with flat box arguments (used by the CLI and fuzzers)."""
    box = list(box)
    if lemma_id == "reverse_cbs":
        if len(box) != 2:
            raise ValueError("reverse_cbs box is a,A")
        weights = np.ones(len(a)) if w is None else w
        return reverse_cbs(a, b, weights, BoundBox(box[0], box[1]), strict)
    if lemma_id == "shisha_mond_product":
        if len(box) != 4:
            raise ValueError("shisha_mond_product box is a,A,b,B")
        return shisha_mond_product(a, b, BoundBox(*box), strict)
    if lemma_id == "shisha_mond_sqrt":
        if len(box) != 2:
            raise ValueError("shisha_mond_sqrt box is gamma,Gamma")
        return shisha_mond_sqrt(a, b, box[0], box[1], strict)
    if lemma_id == "chebyshev":
        return chebyshev_sum(a, b, strict)
    if lemma_id == "biernacki":
        if len(box) != 4:
            raise ValueError("biernacki box is a,A,b,B")
        return biernacki_gruss(a, b, BoundBox(*box), strict)
    if lemma_id == "gruss_fd":
        return gruss_forward_diff(a, b, variant, alpha)
    raise KeyError(lemma_id)
