"""Monte Carlo estimation of secret outage probability under the toy exposure model.

Every raw key leaks independently with probability ``p``; Eve's knowledge is
exactly the set of leaked keys.  A fused message key is compromised only when
every raw key in its window leaked, a plain key when it leaked, and a session
when any of its messages is compromised.

Trials are generated in fixed-size blocks.  Block ``b`` draws from a Philox
stream keyed by the seed with ``b`` placed in the top word of the 256-bit
counter, so the flags of trial ``t`` depend only on ``(seed, t)`` and never on
how blocks are spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DimensionError, ValidationError
from .keyspace import KeyDistribution, min_entropy, point_mass
from .kft import KftSpec, fuse_many
from .sop_analytic import DEFAULT_MESSAGE_COUNT, sop_closed_form
from .window import WindowPlan, WindowPolicy

BLOCK_TRIALS = 8192
_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class ExposureModel:
    leak_probability: float

    def __post_init__(self):
        p = self.leak_probability
        if isinstance(p, bool) or not 0.0 <= p <= 1.0:
            raise ValidationError(f"leak probability must lie in [0, 1], got {p!r}")


@dataclass(frozen=True)
class SessionConfig:
    exposure: ExposureModel
    window_size: int = 1
    message_count: int = DEFAULT_MESSAGE_COUNT
    fusing_enabled: bool = True
    seed: int = 0
    trials: int = 100_000
    policy: WindowPolicy = WindowPolicy.DISJOINT

    def __post_init__(self):
        if self.message_count < 1 or self.window_size < 1 or self.trials < 1:
            raise ValidationError("message_count, window_size and trials must all be >= 1")
        if not 0 <= self.seed <= _U64:
            raise ValidationError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "policy", WindowPolicy(self.policy))

    @property
    def effective_window(self) -> int:
        return self.window_size if self.fusing_enabled else 1

    def plan(self) -> WindowPlan:
        return WindowPlan(self.effective_window, self.message_count, self.policy)

    def analytic_sop(self) -> float:
        """Closed-form SOP; only defined for the disjoint policy."""
        if self.policy is not WindowPolicy.DISJOINT:
            raise ValidationError("closed form covers the disjoint window policy only")
        return sop_closed_form(self.exposure.leak_probability, self.message_count, self.effective_window)


@dataclass(frozen=True, eq=False)
class SessionOutcome:
    compromised: np.ndarray = field(repr=False)
    estimate: float
    std_error: float
    trials: int

    def __eq__(self, other):
        if not isinstance(other, SessionOutcome):
            return NotImplemented
        return (
            self.estimate == other.estimate
            and self.std_error == other.std_error
            and self.trials == other.trials
            and np.array_equal(self.compromised, other.compromised)
        )

    __hash__ = None


def window_compromised(leak_flags: Sequence[bool]) -> bool:
    flags = list(leak_flags)
    if not flags:
        raise ValueError("a window holds at least one key")
    return all(bool(f) for f in flags)


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=block << 192))


def _simulate_block(cfg: SessionConfig, block: int, n: int) -> np.ndarray:
    plan = cfg.plan()
    rng = _block_rng(cfg.seed, block)
    leaked = rng.random((n, plan.keys_required)) < cfg.exposure.leak_probability
    w = plan.window_size
    if plan.policy is WindowPolicy.DISJOINT:
        msg = leaked.reshape(n, plan.message_count, w).all(axis=2)
    else:
        msg = sliding_window_view(leaked, w, axis=1).all(axis=2)
    return msg.any(axis=1)


def simulate_session(cfg: SessionConfig, workers: int = 1) -> SessionOutcome:
    """Estimate the SOP of ``cfg`` from ``cfg.trials`` independent sessions.

    ``workers`` is a parallelism hint; the outcome is identical for any value.
    """
    if workers < 1:
        raise ValidationError("workers must be >= 1")
    sizes = [min(BLOCK_TRIALS, cfg.trials - start) for start in range(0, cfg.trials, BLOCK_TRIALS)]
    if workers == 1 or len(sizes) == 1:
        parts = [_simulate_block(cfg, b, n) for b, n in enumerate(sizes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda bn: _simulate_block(cfg, *bn), enumerate(sizes)))
    flags = np.concatenate(parts)
    flags.flags.writeable = False
    hits = int(np.count_nonzero(flags))
    est = hits / cfg.trials
    return SessionOutcome(flags, est, math.sqrt(est * (1.0 - est) / cfg.trials), cfg.trials)


def z_score(outcome: SessionOutcome, expected: float) -> float:
    """Standardised deviation of the estimate from an expected SOP.

    Uses the binomial standard error under the expected value, so a run that
    saturates at 0 or 1 still yields a finite score against a near-degenerate
    expectation.  Returns 0 on exact agreement and ``inf`` when the
    expectation is degenerate but the estimate differs.
    """
    diff = outcome.estimate - expected
    se = math.sqrt(expected * (1.0 - expected) / outcome.trials)
    if se == 0.0:
        return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
    return diff / se


def fused_entropy_given_leaks(
    k: KftSpec,
    dists: Sequence[KeyDistribution],
    leaked: Sequence[bool],
    leaked_values: Sequence[int | None],
) -> float:
    """Min-entropy of the fused key after Eve learns the values of the leaked inputs.

    A leaked input is replaced by a point mass on its ``leaked_values`` entry
    before the left-fold fusion; entries for unleaked inputs are ignored.
    """
    if not (len(dists) == len(leaked) == len(leaked_values)):
        raise DimensionError("dists, leaked and leaked_values must have equal length")
    adjusted = []
    for d, hit, v in zip(dists, leaked, leaked_values):
        if d.space != k.space:
            raise DimensionError("every distribution must live on the KFT's key space")
        adjusted.append(point_mass(k.space, v) if hit else d)
    return min_entropy(fuse_many(k, adjusted))
