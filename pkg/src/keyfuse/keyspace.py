"""Binary key spaces, distributions over them and entropy metrics.

A key is modelled from the adversary's point of view as a random variable
over ``{0, ..., 2**n - 1}``.  Its strength is measured by min-entropy,
``-log2(max_v P[v])``, the worst-case guessing difficulty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, KeyRangeError, ValidationError

#: Largest key size for which a dense probability vector is materialised.
MAX_EXACT_BITS = 20
#: Largest key size accepted anywhere (key values must fit an unsigned 64-bit word).
MAX_BITS = 64
SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class KeySpace:
    """The set of ``n``-bit keys, ``size == 2**bits``."""

    bits: int

    def __post_init__(self):
        if not isinstance(self.bits, (int, np.integer)) or isinstance(self.bits, bool):
            raise ValidationError(f"bits must be an integer, got {self.bits!r}")
        if not 1 <= self.bits <= MAX_BITS:
            raise ValidationError(f"bits must lie in [1, {MAX_BITS}], got {self.bits}")
        object.__setattr__(self, "bits", int(self.bits))

    @property
    def size(self) -> int:
        return 1 << self.bits

    @classmethod
    def for_size(cls, size: int) -> "KeySpace":
        """Key space with exactly ``size`` elements; ``size`` must be a power of two."""
        if size < 2 or size & (size - 1):
            raise ValidationError(f"key space size must be a power of two >= 2, got {size}")
        return cls(size.bit_length() - 1)

    def check_value(self, v: int) -> int:
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
            raise KeyRangeError(f"key value must be an integer, got {v!r}")
        if not 0 <= v < self.size:
            raise KeyRangeError(f"key value {v} outside [0, {self.size})")
        return int(v)


@dataclass(frozen=True, eq=False)
class KeyDistribution:
    """Probability vector over a :class:`KeySpace`.

    The vector is copied on construction and frozen, so instances can be
    shared freely.
    """

    space: KeySpace
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.space.bits > MAX_EXACT_BITS:
            raise ValidationError(
                f"dense distributions support at most {MAX_EXACT_BITS} bits, got {self.space.bits}"
            )
        probs = np.array(self.probs, dtype=np.float64, copy=True)
        if probs.ndim != 1 or probs.shape[0] != self.space.size:
            raise ValidationError(
                f"expected a vector of length {self.space.size}, got shape {probs.shape}"
            )
        if not np.all(np.isfinite(probs)):
            raise ValidationError("probabilities must be finite")
        if np.any(probs < 0):
            raise ValidationError("probabilities must be non-negative")
        total = math.fsum(probs)
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise ValidationError(f"probabilities sum to {total!r}, not 1")
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_probs(cls, probs: Iterable[float | Fraction], bits: int | None = None) -> "KeyDistribution":
        """Build a distribution, inferring the key space from the vector length if needed."""
        values = [float(x) for x in probs]
        space = KeySpace(bits) if bits is not None else KeySpace.for_size(len(values))
        return cls(space, np.asarray(values, dtype=np.float64))

    @classmethod
    def uniform(cls, space: KeySpace) -> "KeyDistribution":
        return cls(space, np.full(space.size, 1.0 / space.size))

    @property
    def size(self) -> int:
        return self.space.size

    def __len__(self) -> int:
        return self.space.size

    def __eq__(self, other):
        if not isinstance(other, KeyDistribution):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.probs, other.probs)

    __hash__ = None

    def allclose(self, other: "KeyDistribution", atol: float = 1e-12) -> bool:
        return self.space == other.space and bool(np.allclose(self.probs, other.probs, rtol=0, atol=atol))

    def permuted(self, mapping: Sequence[int]) -> "KeyDistribution":
        """Distribution of ``mapping[X]`` where ``X`` follows this distribution."""
        mapping = np.asarray(mapping, dtype=np.int64)
        if mapping.shape != (self.size,) or not np.array_equal(np.sort(mapping), np.arange(self.size)):
            raise ValidationError("mapping must be a permutation of the key space")
        out = np.empty_like(self.probs)
        out[mapping] = self.probs
        return KeyDistribution(self.space, out)


@dataclass(frozen=True)
class NlSource:
    """An ``(n; l)`` key source: keys with min-entropy below ``threshold_l`` count as leaked."""

    space: KeySpace
    threshold_l: float

    def __post_init__(self):
        if not 0 < self.threshold_l <= self.space.bits:
            raise ValidationError(
                f"threshold must lie in (0, {self.space.bits}], got {self.threshold_l}"
            )


def point_mass(space: KeySpace, v: int) -> KeyDistribution:
    """Distribution of a key known to equal ``v`` (a leaked key)."""
    v = space.check_value(v)
    probs = np.zeros(space.size)
    probs[v] = 1.0
    return KeyDistribution(space, probs)


def uniform(space: KeySpace) -> KeyDistribution:
    return KeyDistribution.uniform(space)


def min_entropy(d: KeyDistribution) -> float:
    """``-log2`` of the most likely key, in bits."""
    _check_dist(d)
    pmax = float(d.probs.max())
    # -log2(1.0) is -0.0
    return max(0.0, -math.log2(pmax))


def shannon_entropy(d: KeyDistribution) -> float:
    _check_dist(d)
    p = d.probs[d.probs > 0]
    return max(0.0, -math.fsum(p * np.log2(p)))


def is_leaked(d: KeyDistribution, src: NlSource) -> bool:
    if d.space != src.space:
        raise DimensionError(f"distribution on {d.space.bits} bits, source on {src.space.bits} bits")
    return min_entropy(d) < src.threshold_l


def _check_dist(d) -> None:
    if not isinstance(d, KeyDistribution):
        raise ValidationError(f"expected a KeyDistribution, got {type(d).__name__}")
