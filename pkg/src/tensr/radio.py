"""Idealized unit-disk radio channel.

Nodes i and j are neighbors iff their Euclidean distance is at most
min(d_max_i, d_max_j). Transmissions deliver after a fixed hop latency with
optional independent per-receiver loss. Every transmitted frame's bits are
tallied by kind (control or data) regardless of delivery, which is what the
overhead metric counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .engine import Engine, RngStream

BROADCAST = -1


@dataclass(slots=True)
class ChannelParams:
    d_max: np.ndarray  # per-node range, meters
    hop_latency: float = 0.002
    loss_probability: float = 0.0

    def __post_init__(self) -> None:
        self.d_max = np.asarray(self.d_max, dtype=float)
        if np.any(self.d_max <= 0):
            raise ValueError("d_max must be positive")


@dataclass(slots=True)
class Frame:
    src: int
    dst: int  # node id, or BROADCAST
    payload_bits: int
    kind: str  # "control" | "data"
    send_time: float
    payload: object = None


def neighbors(positions: np.ndarray, params: ChannelParams) -> np.ndarray:
    """Boolean adjacency matrix: edge iff distance <= min of both ranges."""
    delta = positions[:, None, :] - positions[None, :, :]
    dist = np.hypot(delta[..., 0], delta[..., 1])
    limit = np.minimum(params.d_max[:, None], params.d_max[None, :])
    adj = dist <= limit
    np.fill_diagonal(adj, False)
    return adj


@dataclass(slots=True)
class RadioCounters:
    control_bits: int = 0
    data_bits: int = 0
    transmissions: int = 0
    deliveries: int = 0
    unicast_drops: int = 0
    loss_drops: int = 0


class Radio:
    """Shared channel bound to an engine and a position lookup.

    positions_at(t_us) must return the (N, 2) array of true node positions
    for that instant; deliveries invoke on_deliver(receiver_id, frame).
    """

    def __init__(self, engine: Engine, params: ChannelParams,
                 positions_at: Callable[[int], np.ndarray],
                 on_deliver: Callable[[int, Frame], None],
                 loss_stream: RngStream | None = None) -> None:
        self.engine = engine
        self.params = params
        self.positions_at = positions_at
        self.on_deliver = on_deliver
        self.counters = RadioCounters()
        self._loss_rng = loss_stream.rng if loss_stream else None
        if params.loss_probability > 0 and self._loss_rng is None:
            raise ValueError("loss_probability > 0 needs a loss stream")

    def _tally(self, frame: Frame) -> None:
        self.counters.transmissions += 1
        if frame.kind == "data":
            self.counters.data_bits += frame.payload_bits
        else:
            self.counters.control_bits += frame.payload_bits

    def transmit(self, frame: Frame) -> int:
        """Send a frame from its src at the current clock; returns how many
        receivers it was scheduled to. Bits are tallied per transmission,
        delivered or not."""
        self._tally(frame)
        pos = self.positions_at(self.engine.now_us)
        d_max = self.params.d_max
        src = frame.src
        if frame.dst == BROADCAST:
            delta = pos - pos[src]
            dist = np.hypot(delta[:, 0], delta[:, 1])
            limit = np.minimum(d_max, d_max[src])
            reach = np.flatnonzero(dist <= limit)
            reach = reach[reach != src]
        else:
            d = float(np.hypot(*(pos[frame.dst] - pos[src])))
            if d <= min(d_max[src], d_max[frame.dst]):
                reach = np.array([frame.dst])
            else:
                self.counters.unicast_drops += 1
                return 0
        p_loss = self.params.loss_probability
        if p_loss > 0:
            kept = self._loss_rng.random(len(reach)) >= p_loss
            self.counters.loss_drops += int(len(reach) - kept.sum())
            reach = reach[kept]
        if len(reach) == 0:
            return 0
        targets = [int(r) for r in reach]

        def deliver() -> None:
            for r in targets:
                self.on_deliver(r, frame)
                self.counters.deliveries += 1

        self.engine.schedule_in(self.params.hop_latency, deliver)
        return len(targets)
