"""Deterministic discrete-event engine and seeded random streams.

Simulation time is kept as integer microseconds internally so that event
ordering never depends on float comparison quirks; the public API speaks
float seconds.
"""

from __future__ import annotations

import hashlib
import heapq
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

US = 1_000_000  # microseconds per second


def to_us(t: float) -> int:
    return int(round(t * US))


def to_s(t_us: int) -> float:
    return t_us / US


class ScheduleInPastError(Exception):
    """An event was scheduled before the current clock (logic bug)."""


@dataclass(slots=True)
class _Entry:
    handle: "EventHandle"
    action: Callable[[], Any]


@dataclass(slots=True)
class EventHandle:
    time_us: int
    seq: int
    cancelled: bool = False

    def cancel(self) -> None:
        self.cancelled = True


class Engine:
    """Single-threaded event loop with a monotone fixed-point clock."""

    def __init__(self) -> None:
        self._queue: list[tuple[int, int, _Entry]] = []
        self._seq = 0
        self._now_us = 0

    @property
    def now(self) -> float:
        return to_s(self._now_us)

    @property
    def now_us(self) -> int:
        return self._now_us

    def schedule(self, t: float, action: Callable[[], Any]) -> EventHandle:
        """Schedule action at absolute time t (seconds). Returns a handle
        whose cancel() removes the event lazily."""
        t_us = to_us(t)
        if t_us < self._now_us:
            raise ScheduleInPastError(
                f"schedule at t={t} before clock {self.now}")
        handle = EventHandle(t_us, self._seq)
        heapq.heappush(self._queue, (t_us, self._seq, _Entry(handle, action)))
        self._seq += 1
        return handle

    def schedule_in(self, dt: float, action: Callable[[], Any]) -> EventHandle:
        return self.schedule(to_s(self._now_us + to_us(dt)), action)

    def run_until(self, t_end: float) -> float:
        """Fire every event with time <= t_end in (time, insertion) order,
        then set the clock to t_end."""
        end_us = to_us(t_end)
        if end_us < self._now_us:
            raise ScheduleInPastError(
                f"run_until t={t_end} before clock {self.now}")
        while self._queue and self._queue[0][0] <= end_us:
            t_us, _, entry = heapq.heappop(self._queue)
            if entry.handle.cancelled:
                continue
            self._now_us = t_us
            entry.action()
        self._now_us = end_us
        return self.now

    def pending(self) -> int:
        return sum(1 for _, _, e in self._queue if not e.handle.cancelled)


def _digest_seed(*parts: object) -> int:
    h = hashlib.sha256("/".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(h[:8], "little")


@dataclass(slots=True)
class RngStream:
    """Named random stream derived from a master seed.

    Identical (seed, stream_id) pairs reproduce the same draws on any
    platform; distinct stream_ids are independent, so adding a consumer
    never perturbs existing streams.
    """

    seed: int
    stream_id: str
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._rng = np.random.default_rng(
            np.random.SeedSequence(_digest_seed(self.seed, self.stream_id)))

    @property
    def rng(self) -> np.random.Generator:
        return self._rng

    def substream(self, label: object) -> "RngStream":
        return RngStream(self.seed, f"{self.stream_id}/{label}")

    def key64(self) -> int:
        """Stable 64-bit key for counter-based (order-free) sampling."""
        return _digest_seed(self.seed, self.stream_id, "key64")
