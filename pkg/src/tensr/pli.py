"""Position-location information oracle.

Each node periodically samples its own true position, adds Gaussian noise,
and the report reaches every other node independently with a fixed
probability after a fixed delay. PLI travels out of band: it contributes no
bits to protocol overhead. Position uncertainty grows with report staleness
through a piecewise-linear sigma_p(tau).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import Engine, RngStream
from .mobility import TrueTrajectory, true_position


@dataclass(slots=True)
class PliParams:
    broadcast_interval: float = 5.0
    interval_jitter: float = 5.0
    reach_probability: float = 0.5
    broadcast_delay: float = 3.0
    sigma_p_breakpoints: tuple[tuple[float, float], ...] = (
        (0.0, 10.0), (20.0, 20.0), (30.0, 30.0))

    def __post_init__(self) -> None:
        taus = [b[0] for b in self.sigma_p_breakpoints]
        sigs = [b[1] for b in self.sigma_p_breakpoints]
        if any(b >= a for a, b in zip(taus[1:], taus)):
            raise ValueError("breakpoint staleness must be increasing")
        if any(s <= 0 for s in sigs):
            raise ValueError("sigma_p values must be positive")


def sigma_p(tau: float, params: PliParams) -> float:
    """Per-axis position std for a report tau seconds stale; linear between
    breakpoints, clamped outside them."""
    if tau < 0:
        raise ValueError("staleness must be nonnegative")
    pts = params.sigma_p_breakpoints
    taus = np.array([p[0] for p in pts])
    sigs = np.array([p[1] for p in pts])
    return float(np.interp(tau, taus, sigs))


@dataclass(slots=True)
class PliRecord:
    subject: int
    phi: np.ndarray  # reported 2-D position
    timestamp: float  # when the position was sampled


class PliTable:
    """One node's view of received reports, newest per subject."""

    def __init__(self) -> None:
        self._records: dict[int, PliRecord] = {}

    def put(self, rec: PliRecord) -> None:
        cur = self._records.get(rec.subject)
        if cur is None or rec.timestamp > cur.timestamp:
            self._records[rec.subject] = rec

    def get(self, subject: int) -> PliRecord | None:
        return self._records.get(subject)

    def staleness(self, subject: int, now: float) -> float:
        rec = self._records.get(subject)
        return math.inf if rec is None else now - rec.timestamp


class PliOracle:
    """Schedules every node's report cycle and delivers to random subsets."""

    def __init__(self, engine: Engine, params: PliParams,
                 trajectories: list[TrueTrajectory],
                 tables: list[PliTable], stream: RngStream) -> None:
        self.engine = engine
        self.params = params
        self.trajectories = trajectories
        self.tables = tables
        self._rngs = [stream.substream(n).rng
                      for n in range(len(trajectories))]

    def start(self) -> None:
        for node in range(len(self.trajectories)):
            self._schedule_next(node)

    def _schedule_next(self, node: int) -> None:
        gap = self.params.broadcast_interval + \
            self._rngs[node].uniform(0.0, self.params.interval_jitter)
        self.engine.schedule_in(gap, lambda: self._broadcast(node))

    def _broadcast(self, node: int) -> None:
        now = self.engine.now
        rng = self._rngs[node]
        noise_sigma = sigma_p(0.0, self.params)
        phi = true_position(self.trajectories[node], now) + \
            rng.normal(0.0, noise_sigma, size=2)
        rec = PliRecord(node, phi, timestamp=now)
        n = len(self.tables)
        others = np.array([k for k in range(n) if k != node])
        reached = others[rng.random(len(others)) <
                         self.params.reach_probability]
        if len(reached) > 0:
            targets = [int(r) for r in reached]
            self.engine.schedule_in(
                self.params.broadcast_delay,
                lambda: [self.tables[k].put(rec) for k in targets])
        self._schedule_next(node)
