"""Waypoint mobility: planned trajectories, jittered true positions, group
scenario generation, and the average-network-partitioning metric.

A plan is a finite list of timed 2-D waypoints; motion between waypoints is
constant-velocity. Past the final waypoint a node holds its last position.
True positions add white Gaussian jitter, sampled per evaluation instant
from a counter-based hash so any (node, time) point can be evaluated on
demand without draw-order coupling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import RngStream, to_us

U64 = np.uint64


@dataclass(slots=True)
class MobilityPlan:
    """Ordered waypoints (t_j, theta_j). times[0] must be 0 and times must
    be strictly increasing. horizon marks the last instant the plan is
    considered known; evaluation past it holds the final position."""

    node_id: int
    times: np.ndarray
    points: np.ndarray
    horizon: float = math.inf

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        self.points = np.asarray(self.points, dtype=float)
        if self.times.ndim != 1 or self.points.shape != (len(self.times), 2):
            raise ValueError("waypoints must be (k,) times and (k,2) points")
        if len(self.times) == 0 or self.times[0] != 0.0:
            raise ValueError("first waypoint time must be 0")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("waypoint times must be strictly increasing")


def planned_position(plan: MobilityPlan, t: float) -> np.ndarray:
    """theta(t): linear interpolation between bracketing waypoints; holds
    the last waypoint position for t past the end. t < 0 is an error."""
    if t < plan.times[0]:
        raise ValueError(f"t={t} precedes first waypoint")
    x = np.interp(t, plan.times, plan.points[:, 0])
    y = np.interp(t, plan.times, plan.points[:, 1])
    return np.array([x, y])


def _mix64(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer; uint64 wrap-around is intended
    x = (x ^ (x >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> U64(27))) * U64(0x94D049BB133111EB)
    return x ^ (x >> U64(31))


def gaussian_jitter(key: int, t_us: int, node_ids: np.ndarray,
                    sigma: float | np.ndarray) -> np.ndarray:
    """White N(0, sigma^2 I) offsets for the given nodes at one instant.

    Deterministic in (key, t_us, node_id); repeated queries at the same
    instant see the same offsets.
    """
    ids = np.asarray(node_ids, dtype=np.uint64)
    with np.errstate(over="ignore"):
        base = _mix64(U64(key & 0xFFFFFFFFFFFFFFFF) ^
                      _mix64(U64(t_us & 0xFFFFFFFFFFFFFFFF)))
        h1 = _mix64(base ^ _mix64(ids * U64(2) + U64(1)))
        h2 = _mix64(base ^ _mix64(ids * U64(2) + U64(2)))
    # Box-Muller; u1 offset keeps log() away from 0
    u1 = (h1 >> U64(11)).astype(np.float64) * 2.0 ** -53 + 2.0 ** -54
    u2 = (h2 >> U64(11)).astype(np.float64) * 2.0 ** -53
    radius = np.sqrt(-2.0 * np.log(u1)) * sigma
    angle = (2.0 * np.pi) * u2
    return np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=-1)


@dataclass(slots=True)
class TrueTrajectory:
    """Actual motion: the full-mission plan plus per-instant jitter.

    deviation_time records where the visible half of the plan ends; the
    trajectory itself is continuous through it (the same full plan drives
    both halves).
    """

    plan: MobilityPlan
    jitter_sigma: float
    jitter_key: int
    deviation_time: float = math.inf

    @classmethod
    def from_stream(cls, plan: MobilityPlan, sigma: float, stream: RngStream,
                    deviation_time: float = math.inf) -> "TrueTrajectory":
        return cls(plan, sigma, stream.key64(), deviation_time)


def true_position(traj: TrueTrajectory, t: float) -> np.ndarray:
    base = planned_position(traj.plan, t)
    if traj.jitter_sigma == 0.0:
        return base
    off = gaussian_jitter(traj.jitter_key, to_us(t),
                          np.array([traj.plan.node_id]), traj.jitter_sigma)
    return base + off[0]


class PlanTable:
    """Vectorized position evaluation for one plan set.

    Groups sharing waypoint arrays are evaluated once per instant and
    scattered to their member nodes.
    """

    def __init__(self, plans: list[MobilityPlan]):
        self.plans = plans
        keyed: dict[tuple[int, int], int] = {}
        self.slot_of = np.empty(len(plans), dtype=int)
        self.unique: list[MobilityPlan] = []
        for n, plan in enumerate(plans):
            k = (id(plan.times), id(plan.points))
            if k not in keyed:
                keyed[k] = len(self.unique)
                self.unique.append(plan)
            self.slot_of[n] = keyed[k]

    def positions_at(self, t: float) -> np.ndarray:
        """(N, 2) planned positions for every node at time t."""
        pos = np.empty((len(self.unique), 2))
        for s, plan in enumerate(self.unique):
            pos[s, 0] = np.interp(t, plan.times, plan.points[:, 0])
            pos[s, 1] = np.interp(t, plan.times, plan.points[:, 1])
        return pos[self.slot_of]


@dataclass(slots=True)
class GroupScenario:
    """Generation parameters: groups of nodes sharing random waypoint plans
    inside a rectangular area, moving at a fixed target speed."""

    n_groups: int
    nodes_per_group: int
    area: tuple[float, float]
    target_speed: float
    anp_threshold: float = 0.01
    anp_sample_dt: float = 10.0
    max_attempts: int = 200

    @property
    def n_nodes(self) -> int:
        return self.n_groups * self.nodes_per_group


class ScenarioGenerationError(Exception):
    """Could not draw a sufficiently connected scenario."""


@dataclass(slots=True)
class GeneratedScenario:
    visible_plans: list[MobilityPlan]
    full_plans: list[MobilityPlan]
    group_of: np.ndarray
    attempts: int
    planned_anp: float


_PROPOSALS_PER_START = 64
_EPOCH_TRIES = 200


def _covers_all_components(cand: np.ndarray, others: np.ndarray,
                           range_m: float) -> np.ndarray:
    """For each candidate point, does it touch every connected component of
    the `others` unit-disk graph? (That is exactly 'adding the point keeps
    the graph connected'.) Returns a bool mask over candidates."""
    if len(others) == 0:
        return np.ones(len(cand), dtype=bool)
    delta = others[:, None, :] - others[None, :, :]
    adj = np.hypot(delta[..., 0], delta[..., 1]) <= range_m
    np.fill_diagonal(adj, True)
    labels = -np.ones(len(others), dtype=int)
    n_comp = 0
    for start in range(len(others)):
        if labels[start] >= 0:
            continue
        frontier = np.zeros(len(others), dtype=bool)
        frontier[start] = True
        while frontier.any():
            labels[frontier] = n_comp
            frontier = adj[frontier].any(axis=0) & (labels < 0)
        n_comp += 1
    d = np.hypot(cand[:, None, 0] - others[None, :, 0],
                 cand[:, None, 1] - others[None, :, 1]) <= range_m
    ok = np.ones(len(cand), dtype=bool)
    for c in range(n_comp):
        ok &= d[:, labels == c].any(axis=1)
    return ok


def _connected_throughout(a: np.ndarray, b: np.ndarray, range_m: float,
                          dt_ep: float, sample_dt: float) -> bool:
    """Is the group disk graph connected at every cadence instant while all
    groups move linearly from positions a to positions b over dt_ep?"""
    fracs = np.arange(sample_dt, dt_ep, sample_dt) / dt_ep
    for f in np.append(fracs, 1.0):
        pos = a + f * (b - a)
        delta = pos[:, None, :] - pos[None, :, :]
        adj = np.hypot(delta[..., 0], delta[..., 1]) <= range_m
        np.fill_diagonal(adj, False)
        if component_count(adj) > 1:
            return False
    return True


def _draw_group_waypoints(spec: GroupScenario, duration: float, range_m: float,
                          rng: np.random.Generator) -> list[tuple[np.ndarray, np.ndarray]]:
    """Draw waypoint plans for all groups together.

    Start points are uniform in the area, accepted sequentially so the
    start graph is connected. Motion then proceeds in shared epochs: every
    epoch draws one stride length from the uniform-point-pair distance
    distribution (capped so any position can realize it inside the area),
    and each group picks a uniform direction; segment duration is exactly
    stride/target_speed. The whole epoch is redrawn until the group disk
    graph stays connected at the evaluation cadence, which is how generated
    missions keep a low partitioning metric while still churning topology.
    """
    w, h = spec.area
    lo, hi = np.array([0.0, 0.0]), np.array([w, h])
    ng = spec.n_groups
    pos = np.empty((ng, 2))
    for _ in range(_EPOCH_TRIES):
        for g in range(ng):
            cand = rng.uniform(lo, hi, size=(_PROPOSALS_PER_START, 2))
            ok = _covers_all_components(cand, pos[:g], range_m)
            pos[g] = cand[int(np.argmax(ok))] if ok.any() else cand[0]
        if _connected_throughout(pos, pos, range_m, 1.0, 10.0):
            break
    stride_cap = 0.85 * math.hypot(w, h) / 2.0
    times = [0.0]
    traj = [pos.copy()]
    while times[-1] < duration:
        stride = 0.0
        nxt = pos
        for attempt in range(_EPOCH_TRIES):
            if stride == 0.0 or attempt % 50 == 49:
                u1 = rng.uniform(lo, hi)
                u2 = rng.uniform(lo, hi)
                stride = min(float(np.hypot(*(u1 - u2))), stride_cap)
                stride = max(stride, 1.0)
                dt_ep = stride / spec.target_speed
            nxt = np.empty_like(pos)
            for g in range(ng):
                placed = False
                for _ in range(64):
                    ang = rng.uniform(0.0, 2.0 * np.pi)
                    cand = pos[g] + stride * np.array(
                        [math.cos(ang), math.sin(ang)])
                    if (lo <= cand).all() and (cand <= hi).all():
                        nxt[g] = cand
                        placed = True
                        break
                if not placed:
                    # scan a fixed fan; an in-area direction always exists
                    # because the stride is capped below the half-diagonal
                    for k in range(720):
                        ang = 2.0 * np.pi * k / 720.0
                        cand = pos[g] + stride * np.array(
                            [math.cos(ang), math.sin(ang)])
                        if (lo <= cand).all() and (cand <= hi).all():
                            nxt[g] = cand
                            break
            if _connected_throughout(pos, nxt, range_m, dt_ep,
                                     spec.anp_sample_dt):
                break
        times.append(times[-1] + dt_ep)
        traj.append(nxt)
        pos = nxt
    path = np.asarray(traj)
    t_arr = np.asarray(times)
    return [(t_arr, path[:, g, :]) for g in range(ng)]


def component_count(adj: np.ndarray) -> int:
    """Connected components of an undirected boolean adjacency matrix."""
    n = len(adj)
    seen = np.zeros(n, dtype=bool)
    count = 0
    for start in range(n):
        if seen[start]:
            continue
        count += 1
        frontier = np.zeros(n, dtype=bool)
        frontier[start] = True
        while frontier.any():
            seen |= frontier
            frontier = (adj[frontier].any(axis=0)) & ~seen
    return count


def anp(snapshots: list[np.ndarray]) -> float:
    """Time-averaged (components - 1)/(N - 1) over adjacency snapshots:
    0 iff always connected, 1 iff always fully partitioned."""
    if not snapshots:
        raise ValueError("no snapshots")
    total = 0.0
    for adj in snapshots:
        n = len(adj)
        if n < 2:
            raise ValueError("snapshot needs at least 2 nodes")
        total += (component_count(adj) - 1) / (n - 1)
    return total / len(snapshots)


def _planned_anp(plans: list[MobilityPlan], duration: float, range_m: float,
                 sample_dt: float) -> float:
    table = PlanTable(plans)
    snaps = []
    for t in np.arange(0.0, duration + 1e-9, sample_dt):
        pos = table.positions_at(float(t))
        delta = pos[:, None, :] - pos[None, :, :]
        dist = np.hypot(delta[..., 0], delta[..., 1])
        adj = dist <= range_m
        np.fill_diagonal(adj, False)
        snaps.append(adj)
    return anp(snaps)


def generate_scenario(spec: GroupScenario, duration: float, range_m: float,
                      stream: RngStream,
                      deviation_time: float = math.inf) -> GeneratedScenario:
    """Draw group waypoint plans until the planned-position unit-disk graph
    meets the partitioning threshold.

    Returns per-node visible plans (waypoints with t <= deviation_time,
    horizon = deviation_time) and full-mission plans driving true motion.
    """
    rng = stream.rng
    for attempt in range(1, spec.max_attempts + 1):
        group_tp = _draw_group_waypoints(spec, duration, range_m, rng)
        full: list[MobilityPlan] = []
        visible: list[MobilityPlan] = []
        group_of = np.empty(spec.n_nodes, dtype=int)
        for g, (times, pts) in enumerate(group_tp):
            cut = int(np.searchsorted(times, deviation_time, side="right"))
            vis_t, vis_p = times[:cut], pts[:cut]
            for m in range(spec.nodes_per_group):
                n = g * spec.nodes_per_group + m
                group_of[n] = g
                full.append(MobilityPlan(n, times, pts))
                visible.append(MobilityPlan(n, vis_t, vis_p,
                                            horizon=deviation_time))
        value = _planned_anp(full, duration, range_m, spec.anp_sample_dt)
        if value <= spec.anp_threshold:
            return GeneratedScenario(visible, full, group_of, attempt, value)
    raise ScenarioGenerationError(
        f"no scenario met ANP <= {spec.anp_threshold} "
        f"in {spec.max_attempts} attempts")
