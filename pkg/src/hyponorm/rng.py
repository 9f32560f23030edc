"""Seeded, splittable random streams.

Bits come from Philox4x64-10 (a counter-based generator) keyed by the
128-bit value ``seed | stream_id << 64``.  Distributions are derived from
the raw 64-bit words with documented transforms only, so a stream is fully
determined by ``(seed, stream_id)``:

* uniform in [0, 1):  ``(w >> 11) * 2**-53``
* uniform in (0, 1]:  ``((w >> 11) + 1) * 2**-53``
* standard normal:    Box-Muller on consecutive word pairs ``(w0, w1)``,
  ``sqrt(-2 ln u1) * cos(2 pi u0)`` then ``... * sin(2 pi u0)``, with
  ``u1`` from the (0, 1] transform of ``w1``.

Stream ids are composed as ``domain << 32 | index`` so that independent
uses of one seed never share a stream.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_TWO53 = 2.0**-53

# stream domains
GEN = 1
ASCENT = 2
PERTURB = 3
FUZZ = 4
LEMMA = 5


def stream_id(domain: int, index: int = 0) -> int:
    if not 0 <= index < (1 << 32):
        raise ValueError("stream index out of range")
    return (domain << 32) | index


class Stream:
    """A reproducible stream of words, uniforms and normals."""

    def __init__(self, seed: int, sid: int = 0):
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.sid = sid & MASK64
        self._bits = np.random.Philox(key=seed | (self.sid << 64))

    def words(self, size: int) -> np.ndarray:
        return self._bits.random_raw(size).astype(np.uint64)

    def uniform(self, size: int) -> np.ndarray:
        return (self.words(size) >> np.uint64(11)).astype(np.float64) * _TWO53

    def uniform_open0(self, size: int) -> np.ndarray:
        return ((self.words(size) >> np.uint64(11)).astype(np.float64) + 1.0) * _TWO53

    def normal(self, size: int) -> np.ndarray:
        pairs = (size + 1) // 2
        w = self.words(2 * pairs)
        u0 = (w[0::2] >> np.uint64(11)).astype(np.float64) * _TWO53
        u1 = ((w[1::2] >> np.uint64(11)).astype(np.float64) + 1.0) * _TWO53
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.empty(2 * pairs)
        z[0::2] = r * np.cos(2.0 * np.pi * u0)
        z[1::2] = r * np.sin(2.0 * np.pi * u0)
        return z[:size]

    def integers(self, low: int, high: int, size: int) -> np.ndarray:
        """Integers in ``[low, high)`` by multiply-shift on the top 53 bits."""
        if high <= low:
            raise ValueError("empty integer range")
        span = high - low
        return low + np.floor(self.uniform(size) * span).astype(np.int64)

    def integer(self, low: int, high: int) -> int:
        return int(self.integers(low, high, 1)[0])

    def choice(self, options):
        return options[self.integer(0, len(options))]

    def permutation(self, k: int) -> np.ndarray:
        return np.argsort(self.uniform(k), kind="stable")

    def field_normal(self, shape: tuple[int, ...], field: str) -> np.ndarray:
        size = int(np.prod(shape))
        if field == "complex":
            z = self.normal(2 * size)
            return ((z[0::2] + 1j * z[1::2]) / np.sqrt(2.0)).reshape(shape)
        return self.normal(size).reshape(shape)
