"""Seeded tuple generation, equality witnesses and corpus files.

Every tuple drawn by :func:`gen_tuple` is a pure function of its
:class:`GenSpec`: all randomness comes from ``Stream(seed, stream_id(GEN, 0))``
and is consumed in a fixed order (documented per distribution below).

Corpus files are JSON text with the ``.hyponorm.json`` suffix.  Floats are
written with 17 significant digits, complex entries as ``[re, im]`` and the
exponent infinity as the string ``"inf"``.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Any

import numpy as np

from .linalg import INF, GroundSpace, TupleX, as_exponent, format_exponent, parse_exponent
from .rng import GEN, MASK64, Stream, stream_id

CORPUS_FORMAT = "hyponorm-corpus"
CORPUS_VERSION = "1"
SUFFIX = ".hyponorm.json"
DISTRIBUTIONS = ("gaussian", "uniform_ball", "sparse", "rank_one", "duplicates")


@dataclass(frozen=True)
class GenSpec:
    seed: int = 0
    n: int = 3
    m: int = 3
    field: str = "real"
    ground_exponent: float = 2.0
    distribution: str = "gaussian"
    k: int | None = None

    def __post_init__(self):
        for name in ("seed", "n", "m"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise ValueError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if not 0 <= self.seed <= MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be positive")
        if self.field not in ("real", "complex"):
            raise ValueError(f"field must be 'real' or 'complex', got {self.field!r}")
        object.__setattr__(self, "ground_exponent", as_exponent(self.ground_exponent))
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if self.distribution == "sparse":
            if self.k is None or not 1 <= int(self.k) <= self.m:
                raise ValueError(f"sparse distribution needs 1 <= k <= m, got k={self.k!r}")
            object.__setattr__(self, "k", int(self.k))
        elif self.k is not None:
            raise ValueError("k is only meaningful for the sparse distribution")

    @property
    def space(self) -> GroundSpace:
        return GroundSpace(self.m, self.field, self.ground_exponent)

    def label(self) -> str:
        dist = f"sparse({self.k})" if self.distribution == "sparse" else self.distribution
        return (f"{dist},n={self.n},m={self.m},seed={self.seed},field={self.field},"
                f"s={format_exponent(self.ground_exponent)}")

    def as_dict(self) -> dict:
        return {
            "seed": self.seed, "n": self.n, "m": self.m, "field": self.field,
            "ground_exponent": _exp_out(self.ground_exponent),
            "distribution": self.distribution, "k": self.k,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GenSpec":
        return cls(
            seed=d["seed"], n=d["n"], m=d["m"], field=d["field"],
            ground_exponent=_exp_in(d["ground_exponent"]),
            distribution=d["distribution"], k=d.get("k"),
        )


_SPARSE = re.compile(r"sparse\((\d+)\)")


def parse_genspec(text: str) -> GenSpec:
    """Parse ``duplicates,n=2,m=3,seed=7`` style descriptions.

    Recognised keys: ``n``, ``m``, ``seed``, ``field``, ``s`` (or
    ``ground_exponent``) and ``k``.  A bare word names the distribution;
    ``sparse(k)`` sets both distribution and k.
    """
    kw: dict[str, Any] = {}
    for raw in text.split(","):
        part = raw.strip()
        if not part:
            continue
        if "=" not in part:
            m = _SPARSE.fullmatch(part)
            if m:
                kw["distribution"], kw["k"] = "sparse", int(m.group(1))
            else:
                kw["distribution"] = part
            continue
        key, value = (t.strip() for t in part.split("=", 1))
        if key in ("n", "m", "seed", "k"):
            try:
                kw[key] = int(value)
            except ValueError as exc:
                raise ValueError(f"{key} must be an integer, got {value!r}") from exc
        elif key == "field":
            kw["field"] = value
        elif key in ("s", "ground_exponent"):
            kw["ground_exponent"] = parse_exponent(value)
        else:
            raise ValueError(f"unknown generator key {key!r}")
    return GenSpec(**kw)


def _unit_ball(st: Stream, n: int, m: int, field: str) -> np.ndarray:
    # uniform in the Euclidean unit ball of the underlying real space
    d = m if field == "real" else 2 * m
    g = st.normal(n * d).reshape(n, d)
    norms = np.linalg.norm(g, axis=1)
    norms[norms == 0] = 1.0
    radius = st.uniform(n) ** (1.0 / d)
    pts = g / norms[:, None] * radius[:, None]
    if field == "complex":
        return pts[:, 0::2] + 1j * pts[:, 1::2]
    return pts


def gen_tuple(spec: GenSpec) -> TupleX:
    """Draw the tuple described by ``spec``.

    Draw order from the generator stream:

    * gaussian: ``n*m`` field normals, row-major.
    * uniform_ball: ``n*d`` normals (``d`` real coordinates per vector) then
      ``n`` uniforms for the radii.
    * sparse(k): for each row, ``m`` uniforms whose stable argsort picks the
      first ``k`` support positions, then ``k`` field normals.
    * rank_one: ``m`` field normals for ``v`` then ``n`` for the scalars ``c_j``.
    * duplicates: ``m`` field normals for ``v``; every entry equals ``v``.
    """
    st = Stream(spec.seed, stream_id(GEN, 0))
    n, m, fld = spec.n, spec.m, spec.field
    dist = spec.distribution
    if dist == "gaussian":
        data = st.field_normal((n, m), fld)
    elif dist == "uniform_ball":
        data = _unit_ball(st, n, m, fld)
    elif dist == "sparse":
        data = np.zeros((n, m), dtype=spec.space.dtype)
        for j in range(n):
            support = st.permutation(m)[: spec.k]
            data[j, support] = st.field_normal((spec.k,), fld)
    elif dist == "rank_one":
        v = st.field_normal((m,), fld)
        c = st.field_normal((n,), fld)
        data = np.outer(c, v)
    else:
        v = st.field_normal((m,), fld)
        data = np.tile(v, (n, 1))
    return TupleX(spec.space, data)


# ---------------------------------------------------------------------------
# equality witnesses
# ---------------------------------------------------------------------------

WITNESS_CASES = (
    "reverse_cbs_sharp",
    "biernacki_n2",
    "gruss_fd_sup_n2",
    "gruss_fd_l1_n2",
    "sandwich_upper_dup",
    "sandwich_lower_orthonormal",
)


def gen_equality_witness(case_id: str, n: int = 3) -> dict:
    """Input payload at which a checker's slack is exactly zero.

    Scalar cases return the lemma id and keyword arguments for
    :func:`hyponorm.lemmas.run_lemma` (``a`` plays ``z`` and ``b`` plays ``y``
    for the reverse Cauchy-Schwarz case); tuple cases return a :class:`TupleX` under ``"x"``
    with the exponent that makes the named bound tight.
    """
    if case_id == "reverse_cbs_sharp":
        return {"lemma": "reverse_cbs", "kwargs": {
            "a": [1.0, 0.0], "b": [1.0, 1.0], "w": [1.0, 1.0], "box": (0.0, 1.0)}}
    if case_id == "biernacki_n2":
        return {"lemma": "biernacki", "kwargs": {
            "a": [0.0, 1.0], "b": [0.0, 1.0], "box": (0.0, 1.0, 0.0, 1.0)}}
    if case_id == "gruss_fd_sup_n2":
        return {"lemma": "gruss_fd", "kwargs": {"a": [0.0, 1.0], "b": [0.0, 1.0], "variant": "sup"}}
    if case_id == "gruss_fd_l1_n2":
        return {"lemma": "gruss_fd", "kwargs": {"a": [0.0, 1.0], "b": [0.0, 1.0], "variant": "l1"}}
    if case_id == "sandwich_upper_dup":
        v = np.array([3.0, -4.0, 12.0])
        x = TupleX.from_vectors(np.tile(v, (2, 1)))
        return {"x": x, "q": 2.0, "bound": "upper", "value": math.sqrt(2.0) * 13.0}
    if case_id == "sandwich_lower_orthonormal":
        x = TupleX.from_vectors(np.eye(n))
        return {"x": x, "q": 2.0, "bound": "lower", "value": 1.0}
    raise KeyError(f"unknown witness case {case_id!r}")


# ---------------------------------------------------------------------------
# corpus persistence
# ---------------------------------------------------------------------------


class CorpusError(Exception):
    """Base class for corpus file problems."""


class CorpusVersionError(CorpusError):
    pass


class CorpusFormatError(CorpusError):
    pass


class CorpusDimensionError(CorpusError):
    def __init__(self, message: str, index: int):
        super().__init__(f"entry {index}: {message}")
        self.index = index


@dataclass(frozen=True, eq=False)
class CorpusEntry:
    x: TupleX
    spec: GenSpec | None = None

    def __post_init__(self):
        if self.spec is not None:
            if (self.spec.n, self.spec.m) != (self.x.n, self.x.m):
                raise ValueError("tuple shape does not match its generator spec")
            if self.spec.field != self.x.space.field:
                raise ValueError("tuple field does not match its generator spec")

    def __eq__(self, other) -> bool:
        if not isinstance(other, CorpusEntry):
            return NotImplemented
        return self.spec == other.spec and self.x == other.x


@dataclass(eq=True)
class Corpus:
    entries: list[CorpusEntry] = dc_field(default_factory=list)
    metadata: dict = dc_field(default_factory=dict)
    version: str = CORPUS_VERSION

    @classmethod
    def from_specs(cls, specs, metadata: dict | None = None) -> "Corpus":
        return cls([CorpusEntry(gen_tuple(s), s) for s in specs], dict(metadata or {}))

    @classmethod
    def from_tuples(cls, tuples, metadata: dict | None = None) -> "Corpus":
        return cls([CorpusEntry(x) for x in tuples], dict(metadata or {}))

    def __len__(self) -> int:
        return len(self.entries)

    def tuples(self) -> list[TupleX]:
        return [e.x for e in self.entries]

    def to_text(self) -> str:
        doc = {
            "format": CORPUS_FORMAT,
            "version": self.version,
            "metadata": self.metadata,
            "entries": [_entry_out(e) for e in self.entries],
        }
        return _dump(doc) + "\n"

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_text(), encoding="utf-8")
        return path

    @classmethod
    def from_text(cls, text: str) -> "Corpus":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        if not isinstance(doc, dict) or doc.get("format") != CORPUS_FORMAT:
            raise CorpusFormatError("not a hyponorm corpus (missing or wrong 'format' tag)")
        version = doc.get("version")
        if version != CORPUS_VERSION:
            raise CorpusVersionError(f"unsupported corpus version {version!r}, expected {CORPUS_VERSION!r}")
        entries = doc.get("entries")
        metadata = doc.get("metadata", {})
        if not isinstance(entries, list) or not isinstance(metadata, dict):
            raise CorpusFormatError("'entries' must be a list and 'metadata' an object")
        return cls([_entry_in(e, i) for i, e in enumerate(entries)], metadata, version)

    @classmethod
    def load(cls, path) -> "Corpus":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def save_corpus(path, corpus: Corpus) -> Path:
    return corpus.save(path)


def load_corpus(path) -> Corpus:
    return Corpus.load(path)


def _exp_out(e: float):
    return "inf" if math.isinf(e) else e


def _exp_in(v) -> float:
    if isinstance(v, str):
        return parse_exponent(v)
    return as_exponent(v)


def _entry_out(e: CorpusEntry) -> dict:
    x = e.x
    if x.space.field == "complex":
        rows = [[[z.real, z.imag] for z in row] for row in x.data.tolist()]
    else:
        rows = x.data.tolist()
    return {
        "spec": None if e.spec is None else e.spec.as_dict(),
        "n": x.n,
        "m": x.m,
        "field": x.space.field,
        "ground_exponent": _exp_out(x.space.ground_exponent),
        "data": rows,
    }


def _entry_in(d, index: int) -> CorpusEntry:
    if not isinstance(d, dict):
        raise CorpusFormatError(f"entry {index}: expected an object")
    try:
        n, m, fld = d["n"], d["m"], d["field"]
        space = GroundSpace(m, fld, _exp_in(d["ground_exponent"]))
        rows = d["data"]
        spec = None if d.get("spec") is None else GenSpec.from_dict(d["spec"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusFormatError(f"entry {index}: {exc}") from exc
    if not isinstance(rows, list) or len(rows) != n:
        got = len(rows) if isinstance(rows, list) else "?"
        raise CorpusDimensionError(f"declared n={n} but data has {got} rows", index)
    for j, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != m:
            raise CorpusDimensionError(f"row {j} does not have m={m} coordinates", index)
    try:
        if fld == "complex":
            arr = np.array(rows, dtype=np.float64)
            if arr.shape != (n, m, 2):
                raise CorpusFormatError(f"entry {index}: complex coordinates must be [re, im] pairs")
            data = arr[..., 0] + 1j * arr[..., 1]
        else:
            data = np.array(rows, dtype=np.float64)
            if data.shape != (n, m):
                raise CorpusFormatError(f"entry {index}: coordinates must be numbers")
        x = TupleX(space, data)
    except (TypeError, ValueError) as exc:
        raise CorpusFormatError(f"entry {index}: {exc}") from exc
    if spec is not None:
        if (spec.n, spec.m) != (n, m):
            raise CorpusDimensionError(f"spec says n={spec.n}, m={spec.m} but data is {n}x{m}", index)
        if spec.field != fld:
            raise CorpusDimensionError(f"spec field {spec.field!r} differs from data field {fld!r}", index)
    return CorpusEntry(x, spec)


def _num(v: float) -> str:
    if not math.isfinite(v):
        raise ValueError(f"cannot serialise non-finite number {v!r}")
    s = format(v, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _dump(obj, indent: int = 0) -> str:
    """Deterministic JSON writer with 17-significant-digit floats."""
    pad = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_dump(v) for v in obj) + "]"
        if all(isinstance(v, (list, tuple)) and all(not isinstance(w, (dict, list, tuple)) for w in v) for v in obj):
            return "[" + ", ".join(_dump(v) for v in obj) + "]"
        items = [pad + _dump(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + "  " * indent + "]"
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


__all__ = [
    "CORPUS_VERSION", "Corpus", "CorpusDimensionError", "CorpusEntry", "CorpusError",
    "CorpusFormatError", "CorpusVersionError", "DISTRIBUTIONS", "GenSpec", "INF", "SUFFIX",
    "WITNESS_CASES", "gen_equality_witness", "gen_tuple", "load_corpus", "parse_genspec",
    "save_corpus",
]
