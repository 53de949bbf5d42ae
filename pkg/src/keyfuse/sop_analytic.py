"""Closed-form secret outage probability (SOP).

Model: a session protects ``K`` messages.  Each message key is the fusion of
``w`` independent raw keys, each leaked with probability ``p``.  A message is
compromised only when its whole window is leaked (probability ``p**w``), and
the session is compromised when any message is, so

    SOP = 1 - (1 - p**w)**K

``w = 1`` is the non-fusing baseline ``1 - (1 - p)**K``.  All evaluation goes
through ``log1p``/``expm1`` so that SOP values far below machine epsilon
keep full relative precision.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import DomainError, ValidationError

DEFAULT_MESSAGE_COUNT = 60


@dataclass(frozen=True)
class SopQuery:
    p: float
    K: int = DEFAULT_MESSAGE_COUNT
    w: int = 1

    def __post_init__(self):
        _check(self.p, self.K, self.w)

    def sop(self) -> float:
        return sop_closed_form(self.p, self.K, self.w)


def _check(p, K, w):
    if isinstance(p, bool) or not isinstance(p, numbers.Real) or not 0.0 <= p <= 1.0:
        raise ValidationError(f"exposure probability must lie in [0, 1], got {p!r}")
    if int(K) != K or K < 1:
        raise ValidationError(f"message count must be a positive integer, got {K!r}")
    if int(w) != w or w < 1:
        raise ValidationError(f"window size must be a positive integer, got {w!r}")


def window_leak_probability(p: float, w: int) -> float:
    """Probability that all ``w`` keys of one window leak."""
    return float(p) ** int(w)


def sop_closed_form(p: float, K: int = DEFAULT_MESSAGE_COUNT, w: int = 1) -> float:
    _check(p, K, w)
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    x = window_leak_probability(p, w)
    return -math.expm1(K * math.log1p(-x))


def log10_sop(p: float, K: int = DEFAULT_MESSAGE_COUNT, w: int = 1) -> float:
    """``log10`` of the SOP, finite even where the linear value underflows; ``-inf`` at ``p == 0``."""
    _check(p, K, w)
    if p == 0.0:
        return -math.inf
    if p == 1.0:
        return 0.0
    log_x = w * math.log(p)
    if log_x < -700.0:
        # p**w underflows; SOP = K*x*(1 + O(K*x)) with K*x far below double resolution
        return (math.log(K) + log_x) / math.log(10.0)
    return math.log10(sop_closed_form(p, K, w))


def allowed_exposure(target_sop: float, K: int = DEFAULT_MESSAGE_COUNT, w: int = 1) -> float:
    """Largest per-key exposure probability that keeps the SOP at ``target_sop``.

    Inverse of :func:`sop_closed_form` in ``p``:
    ``p = (1 - (1 - target)**(1/K))**(1/w)``.
    """
    if not 0.0 < target_sop < 1.0:
        raise DomainError(f"target SOP must lie in (0, 1), got {target_sop!r}")
    _check(0.0, K, w)
    x = -math.expm1(math.log1p(-target_sop) / K)
    return math.exp(math.log(x) / w)


class SopRow(NamedTuple):
    p: float
    w: int
    sop: float


def sop_curve(p_grid: Sequence[float], K: int, w_grid: Sequence[int]) -> list[SopRow]:
    """Row-major table over ``p_grid`` (outer) and ``w_grid`` (inner)."""
    if not p_grid or not w_grid:
        raise ValidationError("p and w grids must be non-empty")
    return [SopRow(float(p), int(w), sop_closed_form(p, K, w)) for p in p_grid for w in w_grid]
