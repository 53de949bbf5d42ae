"""FIFO key queues and the mapping of raw keys onto protected messages."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .errors import DimensionError, UnderflowError, ValidationError
from .keyspace import KeySpace
from .kft import KftSpec, fuse_keys


class WindowPolicy(enum.Enum):
    DISJOINT = "disjoint"
    # experimental: message i uses raw keys [i, i + w); not part of the reported SOP figures
    SLIDING = "sliding"


class KeyQueue:
    """First-in first-out store of raw keys shared (in lockstep) by both endpoints.

    Not thread-safe.
    """

    def __init__(self, space: KeySpace, entries: Iterable[int] = ()):
        self.space = space
        self._entries: deque[int] = deque()
        self.extend(entries)

    def push(self, v: int) -> None:
        self._entries.append(self.space.check_value(v))

    def extend(self, vs: Iterable[int]) -> None:
        for v in vs:
            self.push(v)

    def pop(self) -> int:
        if not self._entries:
            raise UnderflowError("key queue is empty")
        return self._entries.popleft()

    def pop_many(self, count: int) -> list[int]:
        if count > len(self._entries):
            raise UnderflowError(f"requested {count} keys, only {len(self._entries)} queued")
        return [self._entries.popleft() for _ in range(count)]

    def peek(self, count: int) -> list[int]:
        if count > len(self._entries):
            raise UnderflowError(f"requested {count} keys, only {len(self._entries)} queued")
        return [self._entries[i] for i in range(count)]

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(list(self._entries))

    def __repr__(self) -> str:
        return f"KeyQueue(bits={self.space.bits}, entries={list(self._entries)!r})"


@dataclass(frozen=True)
class WindowPlan:
    window_size: int
    message_count: int
    policy: WindowPolicy = WindowPolicy.DISJOINT

    def __post_init__(self):
        if self.window_size < 1:
            raise ValidationError(f"window size must be >= 1, got {self.window_size}")
        if self.message_count < 1:
            raise ValidationError(f"message count must be >= 1, got {self.message_count}")
        object.__setattr__(self, "policy", WindowPolicy(self.policy))

    @property
    def keys_required(self) -> int:
        if self.policy is WindowPolicy.DISJOINT:
            return self.window_size * self.message_count
        return self.message_count + self.window_size - 1


def assign_windows(plan: WindowPlan) -> list[list[int]]:
    """Raw-key indices feeding each message, in queue order."""
    w = plan.window_size
    if plan.policy is WindowPolicy.DISJOINT:
        return [list(range(i * w, (i + 1) * w)) for i in range(plan.message_count)]
    return [list(range(i, i + w)) for i in range(plan.message_count)]


def fused_message_keys(k: KftSpec, q: KeyQueue, plan: WindowPlan) -> list[int]:
    """Fuse queued raw keys into one key per message and dequeue the consumed keys.

    The queue is left untouched if it holds too few keys.
    """
    if k.space != q.space:
        raise DimensionError("KFT and queue must share one key space")
    need = plan.keys_required
    if len(q) < need:
        raise UnderflowError(f"plan needs {need} raw keys, queue holds {len(q)}")
    raw = q.pop_many(need)
    return [fuse_keys(k, [raw[i] for i in idx]) for idx in assign_windows(plan)]
