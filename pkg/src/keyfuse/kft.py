"""Key-fusing transformations (KFTs).

A KFT is a binary operation ``op`` on the key space whose table is a Latin
square: for every fixed left operand the map over the right operand is a
bijection, and vice versa.  That structure is what makes fusion safe: if
``X`` and ``Y`` are independent then every output probability of
``op(X, Y)`` is a convex combination of probabilities of ``X`` (and of
``Y``), so the output min-entropy is at least the larger of the two input
min-entropies.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import reduce
from typing import NamedTuple, Sequence

import numpy as np

from .errors import CapacityError, DimensionError, ValidationError
from .keyspace import MAX_EXACT_BITS, KeyDistribution, KeySpace

LATIN_SQUARE_MAX_BITS = 12
LAWS_MAX_BITS = 8


class KftKind(enum.Enum):
    XOR = "xor"
    ADD_MOD = "add"
    SUB_MOD = "sub"
    PERMUTED = "permuted"


_BASE_KINDS = (KftKind.XOR, KftKind.ADD_MOD, KftKind.SUB_MOD)


def default_permutation(space: KeySpace) -> tuple[int, ...]:
    """Rotation ``v -> v + 1 mod M``; not linear over XOR for ``n >= 2``."""
    m = space.size
    return tuple((v + 1) % m for v in range(m))


@dataclass(frozen=True)
class KftSpec:
    """A fusion operation on ``space``.

    ``PERMUTED`` applies ``base`` and then maps the result through
    ``permutation``; when no permutation is given the rotation from
    :func:`default_permutation` is used.
    """

    space: KeySpace
    kind: KftKind = KftKind.XOR
    permutation: tuple[int, ...] | None = None
    base: KftKind = KftKind.XOR
    _perm: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        kind = KftKind(self.kind)
        base = KftKind(self.base)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "base", base)
        if base not in _BASE_KINDS:
            raise ValidationError(f"base kind must be one of {[k.value for k in _BASE_KINDS]}")
        if kind is not KftKind.PERMUTED:
            if self.permutation is not None:
                raise ValidationError("a permutation is only meaningful for PERMUTED")
            return
        if self.space.bits > MAX_EXACT_BITS:
            raise CapacityError(f"PERMUTED needs an explicit table; at most {MAX_EXACT_BITS} bits")
        perm = self.permutation
        if perm is None:
            perm = default_permutation(self.space)
        perm = tuple(int(v) for v in perm)
        if sorted(perm) != list(range(self.space.size)):
            raise ValidationError("permutation must be a bijection on the key space")
        object.__setattr__(self, "permutation", perm)
        arr = np.asarray(perm, dtype=np.int64)
        arr.flags.writeable = False
        object.__setattr__(self, "_perm", arr)

    def apply(self, a: int, b: int) -> int:
        return apply(self, a, b)

    def row(self, a: int) -> np.ndarray:
        """``op(a, b)`` for every ``b`` in the key space, as an index vector."""
        m = self.space.size
        b = np.arange(m, dtype=np.int64)
        kind = self.base if self.kind is KftKind.PERMUTED else self.kind
        if kind is KftKind.XOR:
            out = a ^ b
        elif kind is KftKind.ADD_MOD:
            out = (a + b) & (m - 1)
        else:
            out = (a - b) & (m - 1)
        if self._perm is not None:
            out = self._perm[out]
        return out

    def table(self) -> np.ndarray:
        """Full ``M x M`` operation table."""
        m = self.space.size
        if self.space.bits > LATIN_SQUARE_MAX_BITS:
            raise CapacityError(f"operation table limited to {LATIN_SQUARE_MAX_BITS} bits")
        return np.stack([self.row(a) for a in range(m)])


def apply(k: KftSpec, a: int, b: int) -> int:
    a = k.space.check_value(a)
    b = k.space.check_value(b)
    mask = k.space.size - 1
    kind = k.base if k.kind is KftKind.PERMUTED else k.kind
    if kind is KftKind.XOR:
        out = a ^ b
    elif kind is KftKind.ADD_MOD:
        out = (a + b) & mask
    else:
        out = (a - b) & mask
    if k.permutation is not None:
        out = k.permutation[out]
    return out


def fuse_dist(k: KftSpec, a: KeyDistribution, b: KeyDistribution) -> KeyDistribution:
    """Distribution of ``op(X, Y)`` for independent ``X ~ a`` and ``Y ~ b``.

    Dense ``O(M**2)`` pushforward.  Each table row is a permutation, so the
    scatter-add for one row never collides with itself.
    """
    if not (a.space == b.space == k.space):
        raise DimensionError("KFT and both distributions must share one key space")
    out = np.zeros(k.space.size)
    for u in np.flatnonzero(a.probs):
        out[k.row(int(u))] += a.probs[u] * b.probs
    return KeyDistribution(k.space, out)


def fuse_many(k: KftSpec, ds: Sequence[KeyDistribution]) -> KeyDistribution:
    """Left fold of :func:`fuse_dist`; the inputs must be mutually independent."""
    ds = list(ds)
    if not ds:
        raise ValueError("fuse_many needs at least one distribution")
    return reduce(lambda acc, d: fuse_dist(k, acc, d), ds[1:], ds[0])


def fuse_keys(k: KftSpec, vs: Sequence[int]) -> int:
    vs = list(vs)
    if not vs:
        raise ValueError("fuse_keys needs at least one key")
    first = k.space.check_value(vs[0])
    return reduce(lambda acc, v: apply(k, acc, v), vs[1:], first)


def is_latin_square(table) -> bool:
    """True iff every row and every column of a square table is a permutation of ``range(M)``."""
    t = np.asarray(table)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        return False
    m = t.shape[0]
    if t.size and (t.min() < 0 or t.max() >= m):
        return False
    want = np.arange(m)
    rows_ok = np.array_equal(np.sort(t, axis=1), np.broadcast_to(want, (m, m)))
    cols_ok = np.array_equal(np.sort(t, axis=0), np.broadcast_to(want[:, None], (m, m)))
    return rows_ok and cols_ok


def verify_latin_square(k: KftSpec) -> bool:
    if k.space.bits > LATIN_SQUARE_MAX_BITS:
        raise CapacityError(f"exhaustive Latin-square check limited to {LATIN_SQUARE_MAX_BITS} bits")
    return is_latin_square(k.table())


class Laws(NamedTuple):
    commutative: bool
    associative: bool


def table_laws(table) -> Laws:
    t = np.asarray(table)
    commutative = bool(np.array_equal(t, t.T))
    # (a*b)*c == t[t[a, b], c];  a*(b*c) == t[a, t[b, c]]
    left = t[t, :]                        # left[a, b, c] = t[t[a, b], c]
    right = t[np.arange(t.shape[0])[:, None, None], t[None, :, :]]   # t[a, t[b, c]]
    associative = bool(np.array_equal(left, right))
    return Laws(commutative, associative)


def check_laws(k: KftSpec) -> Laws:
    """Exhaustive commutativity and associativity check over all pairs and triples."""
    if k.space.bits > LAWS_MAX_BITS:
        raise CapacityError(f"exhaustive law check limited to {LAWS_MAX_BITS} bits")
    return table_laws(k.table())
