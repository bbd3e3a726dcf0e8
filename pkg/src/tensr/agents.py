"""Per-node protocol state machines.

Two agents are provided.  The table-exchange agent runs the full
machinery: periodic HELLOs establish neighbor state and measured
distances, periodic INFOs gossip changed table rows, encounter windows
roll into social ties, and forwarding follows most-reliable-path tables
rebuilt from the estimator.  The baseline agent is a deliberately plain
flooding link-state protocol: HELLOs with symmetric-link confirmation,
sequence-numbered topology floods with duplicate suppression, and
hop-count shortest-path routes.

Message sizes use a fixed accounting model — 64 bits of header, 32 bits
per neighbor entry, 96 bits per table row — applied identically to both
protocols; data packets carry their own size.  All emission timers jitter
by a uniform ±10% to avoid lockstep synchronization.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .engine import Engine, EventHandle, RngStream
from .estimator import EstimatorParams, NodeView, estimate_matrix
from .linkstate import MAT_A, MAT_D, LinkStateStore, TableRows
from .mobility import MobilityPlan
from .pli import PliRecord, PliTable
from .radio import BROADCAST, Frame, Radio
from .router import RoutingTable, build_graph, most_reliable_paths

HEADER_BITS = 64
NEIGHBOR_ENTRY_BITS = 32
TABLE_ROW_BITS = 96


# ------------------------------------------------------------- messages


@dataclass(slots=True)
class HelloMessage:
    sender: int
    neighbors: np.ndarray  # ids the sender currently hears
    stamps: np.ndarray     # matching adjacency stamps
    rows: TableRows        # expanded form only


@dataclass(slots=True)
class InfoMessage:
    sender: int
    rows: TableRows


@dataclass(slots=True)
class BaselineHello:
    sender: int
    heard: tuple[int, ...]


@dataclass(slots=True)
class TcMessage:
    origin: int
    seq: int
    neighbors: tuple[int, ...]


@dataclass(slots=True)
class Packet:
    flow: int
    src: int
    dst: int
    bits: int
    send_time: float
    hops: int = 0
    is_reply: bool = False


# --------------------------------------------------------------- params


@dataclass
class TensrParams:
    estimator: EstimatorParams | None = None
    hello_interval: float = 0.5
    info_interval: float = 4.0
    expanded_hello: bool = False
    tie_interval: float = 6.0       # encounter-window slot width
    r_mem: int = 10                 # encounter-window slots remembered
    neighbor_timeout_factor: float = 3.0
    route_recompute: float = 1.0
    max_info_rows: int = 64
    max_expanded_rows: int = 8
    hop_limit: int = 32
    jitter_frac: float = 0.1


@dataclass
class BaselineParams:
    hello_interval: float = 2.0
    tc_interval: float = 5.0
    link_hold: float = 6.0
    topology_hold: float = 15.0
    route_recompute: float = 1.0
    hop_limit: int = 32
    jitter_frac: float = 0.1


@dataclass(slots=True)
class ForwardCounters:
    unreachable_drops: int = 0
    hoplimit_drops: int = 0


# ---------------------------------------------------- table-exchange agent


class TensrAgent:
    """One node of the table-exchange protocol."""

    def __init__(self, engine: Engine, radio: Radio, node_id: int,
                 n_nodes: int, params: TensrParams, pli_table: PliTable,
                 plans: dict[int, MobilityPlan],
                 positions_at: Callable[[int], np.ndarray],
                 stream: RngStream,
                 on_data_delivered: Callable[[Packet, float], None]) -> None:
        if params.estimator is None:
            raise ValueError("TensrParams.estimator must be provided")
        self.engine = engine
        self.radio = radio
        self.node_id = node_id
        self.params = params
        self.positions_at = positions_at
        self.on_data_delivered = on_data_delivered
        self.store = LinkStateStore(n_nodes, r_mem=params.r_mem)
        self.view = NodeView(node_id=node_id, store=self.store,
                             pli=pli_table, plans=plans,
                             params=params.estimator)
        self.counters = ForwardCounters()
        self.info_emissions = 0
        self._rng = stream.substream(("tensr", node_id)).rng
        self._nbr_timers: dict[int, EventHandle] = {}
        self._table: RoutingTable | None = None
        self._table_slot = -1
        self._table_dirty = True

    def start(self) -> None:
        self.engine.schedule_in(
            self._rng.uniform(0.0, self.params.hello_interval),
            self._emit_hello)
        self.engine.schedule_in(
            self._rng.uniform(0.0, self.params.info_interval),
            self._emit_info)
        self.engine.schedule_in(self.params.tie_interval, self._tie_tick)

    # -- emissions

    def _emit_hello(self) -> None:
        now = self.engine.now
        me = self.node_id
        nbrs = np.flatnonzero(self.store.A.values[me] == 1.0)
        stamps = self.store.A.stamps[me, nbrs]
        rows = (self.store.peek_dirty_rows(self.params.max_expanded_rows)
                if self.params.expanded_hello else TableRows.empty())
        bits = (HEADER_BITS + NEIGHBOR_ENTRY_BITS * len(nbrs)
                + TABLE_ROW_BITS * len(rows))
        self.radio.transmit(Frame(me, BROADCAST, bits, "control", now,
                                  HelloMessage(me, nbrs, stamps, rows)))
        jitter = 1.0 + self.params.jitter_frac * self._rng.uniform(-1.0, 1.0)
        self.engine.schedule_in(self.params.hello_interval * jitter,
                                self._emit_hello)

    def _emit_info(self) -> None:
        now = self.engine.now
        rows = self.store.take_dirty_rows(self.params.max_info_rows)
        if len(rows):
            bits = HEADER_BITS + TABLE_ROW_BITS * len(rows)
            self.radio.transmit(Frame(self.node_id, BROADCAST, bits,
                                      "control", now,
                                      InfoMessage(self.node_id, rows)))
            self.info_emissions += 1
        self.engine.schedule_in(self.params.info_interval, self._emit_info)

    def _tie_tick(self) -> None:
        now = self.engine.now
        for other in sorted(self.store.windows.tracked()):
            self.store.record_interval(self.node_id, other, now)
        self.engine.schedule_in(self.params.tie_interval, self._tie_tick)

    # -- receptions

    def on_frame(self, frame: Frame) -> None:
        now = self.engine.now
        payload = frame.payload
        if frame.kind == "data":
            self._on_data(payload, now)
        elif isinstance(payload, HelloMessage):
            self._on_hello(payload, now)
        elif isinstance(payload, InfoMessage):
            self.store.merge_rows(payload.rows)

    def _on_hello(self, msg: HelloMessage, now: float) -> None:
        me = self.node_id
        sender = msg.sender
        pos = self.positions_at(self.engine.now_us)
        dist = float(np.hypot(*(pos[me] - pos[sender])))
        if self.store.A.values[me, sender] != 1.0:
            self._table_dirty = True
        self.store.set_entry(MAT_A, me, sender, 1.0, now)
        self.store.set_entry(MAT_D, me, sender, dist, now)
        self.store.windows.mark(sender)

        prev = self._nbr_timers.pop(sender, None)
        if prev is not None:
            prev.cancel()
        timeout = (self.params.neighbor_timeout_factor
                   * self.params.hello_interval)
        self._nbr_timers[sender] = self.engine.schedule_in(
            timeout, lambda: self._neighbor_timeout(sender))

        keep = msg.neighbors != me
        if keep.any():
            self.store.merge_neighbor_entries(sender, msg.neighbors[keep],
                                              msg.stamps[keep])
        if len(msg.rows):
            self.store.merge_rows(msg.rows)

    def _neighbor_timeout(self, neighbor: int) -> None:
        self._nbr_timers.pop(neighbor, None)
        if self.store.A.values[self.node_id, neighbor] == 1.0:
            self.store.set_entry(MAT_A, self.node_id, neighbor, 0.0,
                                 self.engine.now)
            self._table_dirty = True

    # -- routing and forwarding

    def routes(self) -> RoutingTable:
        """Current routing table; rebuilt lazily when the recompute-grid
        slot advances or the neighbor set changed."""
        now = self.engine.now
        slot = int(now // self.params.route_recompute)
        if self._table is None or self._table_dirty or slot != self._table_slot:
            me = self.node_id
            own_pos = self.positions_at(self.engine.now_us)[me].copy()
            self.view.pli.put(PliRecord(me, own_pos, now))
            p_hat, _ = estimate_matrix(self.view, now)
            self._table = most_reliable_paths(build_graph(p_hat), me)
            self._table_slot = slot
            self._table_dirty = False
        return self._table

    def send_data(self, packet: Packet) -> None:
        self._forward(packet)

    def _on_data(self, packet: Packet, now: float) -> None:
        if packet.dst == self.node_id:
            self.on_data_delivered(packet, now)
        else:
            self._forward(packet)

    def _forward(self, packet: Packet) -> None:
        if packet.hops >= self.params.hop_limit:
            self.counters.hoplimit_drops += 1
            return
        nxt = int(self.routes().next_hop[packet.dst])
        if nxt < 0:
            self.counters.unreachable_drops += 1
            return
        packet.hops += 1
        self.radio.transmit(Frame(self.node_id, nxt, packet.bits, "data",
                                  self.engine.now, packet))


# ------------------------------------------------------------- baseline


class BaselineAgent:
    """Simplified flooding link-state node: symmetric-link HELLO sensing,
    full topology floods (no relay-set reduction), hop-count routes."""

    def __init__(self, engine: Engine, radio: Radio, node_id: int,
                 n_nodes: int, params: BaselineParams, stream: RngStream,
                 on_data_delivered: Callable[[Packet, float], None]) -> None:
        self.engine = engine
        self.radio = radio
        self.node_id = node_id
        self.n_nodes = n_nodes
        self.params = params
        self.on_data_delivered = on_data_delivered
        self.counters = ForwardCounters()
        self._rng = stream.substream(("baseline", node_id)).rng
        self._heard: dict[int, float] = {}       # last HELLO time per node
        self._their_lists: dict[int, tuple[int, ...]] = {}
        self._topology: dict[int, tuple[int, tuple[int, ...], float]] = {}
        self._last_seq: dict[int, int] = {}
        self._seq = 0
        self._next_hop: list[int] | None = None
        self._table_slot = -1
        self._table_dirty = True

    def start(self) -> None:
        self.engine.schedule_in(
            self._rng.uniform(0.0, self.params.hello_interval),
            self._emit_hello)
        self.engine.schedule_in(
            self._rng.uniform(0.0, self.params.tc_interval), self._emit_tc)

    def _confirmed(self, now: float) -> list[int]:
        """Symmetric neighbors: recently heard and they list us back."""
        hold = self.params.link_hold
        return sorted(n for n, t in self._heard.items()
                      if now - t <= hold
                      and self.node_id in self._their_lists.get(n, ()))

    # -- emissions

    def _emit_hello(self) -> None:
        now = self.engine.now
        hold = self.params.link_hold
        heard = tuple(sorted(n for n, t in self._heard.items()
                             if now - t <= hold))
        bits = HEADER_BITS + NEIGHBOR_ENTRY_BITS * len(heard)
        self.radio.transmit(Frame(self.node_id, BROADCAST, bits, "control",
                                  now, BaselineHello(self.node_id, heard)))
        jitter = 1.0 + self.params.jitter_frac * self._rng.uniform(-1.0, 1.0)
        self.engine.schedule_in(self.params.hello_interval * jitter,
                                self._emit_hello)

    def _emit_tc(self) -> None:
        now = self.engine.now
        self._seq += 1
        msg = TcMessage(self.node_id, self._seq,
                        tuple(self._confirmed(now)))
        bits = HEADER_BITS + NEIGHBOR_ENTRY_BITS * len(msg.neighbors)
        self.radio.transmit(Frame(self.node_id, BROADCAST, bits, "control",
                                  now, msg))
        jitter = 1.0 + self.params.jitter_frac * self._rng.uniform(-1.0, 1.0)
        self.engine.schedule_in(self.params.tc_interval * jitter,
                                self._emit_tc)

    # -- receptions

    def on_frame(self, frame: Frame) -> None:
        now = self.engine.now
        payload = frame.payload
        if frame.kind == "data":
            self._on_data(payload, now)
        elif isinstance(payload, BaselineHello):
            self._heard[payload.sender] = now
            self._their_lists[payload.sender] = payload.heard
            self._table_dirty = True
        elif isinstance(payload, TcMessage):
            self._on_tc(payload, now)

    def _on_tc(self, msg: TcMessage, now: float) -> None:
        if msg.origin == self.node_id:
            return
        if msg.seq <= self._last_seq.get(msg.origin, -1):
            return                          # duplicate or stale flood
        self._last_seq[msg.origin] = msg.seq
        self._topology[msg.origin] = (msg.seq, msg.neighbors, now)
        self._table_dirty = True
        bits = HEADER_BITS + NEIGHBOR_ENTRY_BITS * len(msg.neighbors)
        self.radio.transmit(Frame(self.node_id, BROADCAST, bits, "control",
                                  now, msg))

    # -- routing and forwarding

    def routes(self) -> list[int]:
        """Hop-count next-hop table via breadth-first search over the
        confirmed links plus unexpired flooded topology rows."""
        now = self.engine.now
        slot = int(now // self.params.route_recompute)
        if (self._next_hop is None or self._table_dirty
                or slot != self._table_slot):
            self._rebuild(now)
            self._table_slot = slot
            self._table_dirty = False
        return self._next_hop

    def _rebuild(self, now: float) -> None:
        n = self.n_nodes
        me = self.node_id
        adj: list[set[int]] = [set() for _ in range(n)]
        for nbr in self._confirmed(now):
            adj[me].add(nbr)
            adj[nbr].add(me)
        for origin, (_seq, nbrs, t) in self._topology.items():
            if now - t <= self.params.topology_hold:
                for v in nbrs:
                    adj[origin].add(v)
                    adj[v].add(origin)
        next_hop = [-1] * n
        next_hop[me] = me
        seen = [False] * n
        seen[me] = True
        queue = deque([me])
        while queue:
            u = queue.popleft()
            for v in sorted(adj[u]):
                if not seen[v]:
                    seen[v] = True
                    next_hop[v] = v if u == me else next_hop[u]
                    queue.append(v)
        self._next_hop = next_hop

    def send_data(self, packet: Packet) -> None:
        self._forward(packet)

    def _on_data(self, packet: Packet, now: float) -> None:
        if packet.dst == self.node_id:
            self.on_data_delivered(packet, now)
        else:
            self._forward(packet)

    def _forward(self, packet: Packet) -> None:
        if packet.hops >= self.params.hop_limit:
            self.counters.hoplimit_drops += 1
            return
        nxt = self.routes()[packet.dst]
        if nxt < 0:
            self.counters.unreachable_drops += 1
            return
        packet.hops += 1
        self.radio.transmit(Frame(self.node_id, nxt, packet.bits, "data",
                                  self.engine.now, packet))
