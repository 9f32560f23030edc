"""Coordinate model for tuples of vectors in a finite-dimensional normed space.

A ground space is ``K^m`` (``K`` real or complex) with the s-norm on
coordinates.  A tuple ``x = (x_1, ..., x_n)`` is stored as an ``(n, m)``
array whose rows are the vectors ``x_j``.  Exponents are plain floats in
``[1, inf]`` with ``math.inf`` as a first-class value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np

Field = Literal["real", "complex"]
INF = math.inf


class ExponentError(ValueError):
    """An exponent outside ``[1, inf]`` or not a number."""


def as_exponent(value) -> float:
    """Validate and normalise an exponent to a float in ``[1, inf]``."""
    if isinstance(value, bool):
        raise ExponentError(f"exponent must be numeric, got {value!r}")
    if isinstance(value, str):
        return parse_exponent(value)
    try:
        e = float(value)
    except (TypeError, ValueError) as exc:
        raise ExponentError(f"exponent must be numeric, got {value!r}") from exc
    if math.isnan(e) or e < 1.0:
        raise ExponentError(f"exponent must lie in [1, inf], got {value!r}")
    return e


def parse_exponent(text: str) -> float:
    """Parse ``inf``, an integer, a decimal or a rational ``a/b``."""
    t = text.strip().lower()
    if t in ("inf", "infinity", "oo", "∞"):
        return INF
    try:
        value = float(Fraction(t))
    except (ValueError, ZeroDivisionError) as exc:
        raise ExponentError(f"cannot parse exponent {text!r}") from exc
    return as_exponent(value)


def format_exponent(e: float) -> str:
    """Short stable label: ``inf``, ``2``, ``3/2`` or the float repr."""
    if math.isinf(e):
        return "inf"
    if e == int(e):
        return str(int(e))
    frac = Fraction(e).limit_denominator(64)
    if float(frac) == e:
        return f"{frac.numerator}/{frac.denominator}"
    return repr(e)


def conjugate_exponent(p) -> float:
    """Return q with 1/p + 1/q = 1, using the conventions 1 <-> inf."""
    p = as_exponent(p)
    if p == 1.0:
        return INF
    if math.isinf(p):
        return 1.0
    if p == 2.0:
        return 2.0
    return 1.0 + 1.0 / (p - 1.0)


def _pnorm_rows(a: np.ndarray, p: float) -> np.ndarray:
    """p-norm along the last axis, scaled by the row maximum against overflow."""
    if a.shape[-1] == 0:
        return np.zeros(a.shape[:-1])
    mod = np.abs(a)
    if math.isinf(p):
        return mod.max(axis=-1)
    if p == 1.0:
        return mod.sum(axis=-1)
    top = mod.max(axis=-1)
    safe = np.where(top > 0, top, 1.0)
    t = mod / safe[..., None]
    if p == 2.0:
        return top * np.sqrt(np.einsum("...i,...i->...", t, t))
    return top * np.sum(t**p, axis=-1) ** (1.0 / p)


def scalar_pnorm(c, p) -> float:
    """The usual p-norm of a coefficient vector (max modulus for p = inf)."""
    p = as_exponent(p)
    arr = np.asarray(c)
    if arr.ndim != 1:
        raise ValueError("coefficient vector must be one-dimensional")
    return float(_pnorm_rows(arr[None, :], p)[0])


@dataclass(frozen=True)
class GroundSpace:
    """``K^dim`` equipped with the s-norm, ``s = ground_exponent``."""

    dim: int
    field: Field = "real"
    ground_exponent: float = 2.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim!r}")
        if self.field not in ("real", "complex"):
            raise ValueError(f"field must be 'real' or 'complex', got {self.field!r}")
        object.__setattr__(self, "ground_exponent", as_exponent(self.ground_exponent))

    @property
    def dtype(self):
        return np.complex128 if self.field == "complex" else np.float64

    @property
    def is_euclidean(self) -> bool:
        return self.ground_exponent == 2.0

    @property
    def dual_exponent(self) -> float:
        return conjugate_exponent(self.ground_exponent)

    def vector(self, coords) -> np.ndarray:
        v = np.asarray(coords)
        if v.shape != (self.dim,):
            raise ValueError(f"vector has shape {v.shape}, expected ({self.dim},)")
        if self.field == "real" and np.iscomplexobj(v):
            if np.any(v.imag != 0):
                raise ValueError("complex coordinates in a real ground space")
            v = v.real
        out = np.array(v, dtype=self.dtype)
        out.setflags(write=False)
        return out


def ground_norm(v, space: GroundSpace) -> float:
    """Norm of a vector of ``space``: the s-norm of its coordinates."""
    v = np.asarray(v)
    if v.shape != (space.dim,):
        raise ValueError(f"vector has shape {v.shape}, expected ({space.dim},)")
    return scalar_pnorm(v, space.ground_exponent)


@dataclass(frozen=True, eq=False)
class TupleX:
    """An n-tuple of vectors of one ground space, stored row-wise."""

    space: GroundSpace
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise ValueError(f"tuple data must be 2-D (n, m), got shape {arr.shape}")
        n, m = arr.shape
        if n < 1:
            raise ValueError("a tuple needs at least one entry")
        if m != self.space.dim:
            raise ValueError(f"entries have dimension {m}, ground space has {self.space.dim}")
        if self.space.field == "real" and np.iscomplexobj(arr):
            if np.any(arr.imag != 0):
                raise ValueError("complex entries in a real ground space")
            arr = arr.real
        arr = np.array(arr, dtype=self.space.dtype)
        if not np.all(np.isfinite(arr)):
            raise ValueError("tuple entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_vectors(
        cls, vectors: Sequence, field: Field = "real", ground_exponent=2.0
    ) -> "TupleX":
        arr = np.atleast_2d(np.asarray(vectors))
        if field == "real" and np.iscomplexobj(arr):
            field = "complex"
        space = GroundSpace(arr.shape[1], field, ground_exponent)
        return cls(space, arr)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def m(self) -> int:
        return self.data.shape[1]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, j: int) -> np.ndarray:
        return self.data[j]

    def __eq__(self, other) -> bool:
        if not isinstance(other, TupleX):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.space, self.data.tobytes()))

    def with_data(self, data) -> "TupleX":
        return TupleX(self.space, data)

    def scaled(self, alpha) -> "TupleX":
        return TupleX(self.space, self.data * alpha)

    def __add__(self, other: "TupleX") -> "TupleX":
        if self.space != other.space or self.n != other.n:
            raise ValueError("tuples must share ground space and length")
        return TupleX(self.space, self.data + other.data)

    def ground_norms(self) -> np.ndarray:
        return _pnorm_rows(self.data, self.space.ground_exponent)


def tuple_pnorm(x: TupleX, p) -> float:
    """p-norm on E^n: the p-norm of the sequence of ground norms."""
    return scalar_pnorm(x.ground_norms(), p)


def forward_difference(x: TupleX) -> TupleX:
    """``(x_2 - x_1, ..., x_n - x_{n-1})``; needs n >= 2."""
    if x.n < 2:
        raise ValueError("forward difference needs a tuple of length n >= 2")
    return TupleX(x.space, np.diff(x.data, axis=0))


def tuple_inner(x: TupleX, y: TupleX) -> complex | float:
    """Inner product sum_j <x_j, y_j> on H^n (conjugate-linear in y)."""
    if x.space != y.space:
        raise ValueError("tuples live in different ground spaces")
    if not x.space.is_euclidean:
        raise ValueError("inner product needs a Euclidean (s = 2) ground space")
    if x.n != y.n:
        raise ValueError(f"tuple lengths differ: {x.n} vs {y.n}")
    value = np.sum(x.data * np.conj(y.data))
    if x.space.field == "real":
        return float(value.real)
    return complex(value)
