"""Run orchestration: wire a Scenario into a live network, drive traffic,
collect metrics, and fan Monte-Carlo campaigns over a parameter grid.

Every random draw comes from named substreams of one per-trial seed, so a
(scenario, protocol, seed) triple is fully reproducible, and both protocols
of a paired comparison see identical mobility, jitter, and traffic.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .agents import BaselineAgent, Packet, TensrAgent
from .engine import Engine, RngStream
from .mobility import (GeneratedScenario, PlanTable, TrueTrajectory, anp,
                       gaussian_jitter, generate_scenario)
from .pli import PliOracle, PliTable
from .radio import ChannelParams, Radio, neighbors
from .scenario import Scenario, ScenarioError, check_scenario

PROTOCOLS = ("tensr", "baseline")

# campaign grid defaults: (nodes per group, groups) and m/s
DEFAULT_GROUPINGS = ((2, 10), (3, 7), (4, 5))
DEFAULT_VELOCITIES = (10.0, 20.0, 30.0)
DEFAULT_SWEEP = (0.25, 0.5, 1.0, 2.0, 4.0)


def stable_mix(master_seed: int, k: int) -> int:
    """Seed for trial k: platform-stable and independent of how many
    trials run, so extending a campaign never changes earlier trials."""
    digest = hashlib.sha256(f"{master_seed}/trial/{k}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass
class FlowStats:
    flow: int
    src: int
    dst: int
    sent: int = 0
    delivered: int = 0
    reply_sent: int = 0
    reply_delivered: int = 0


@dataclass
class RunMetrics:
    """One run's outcome. mean_delay is seconds over delivered packets
    (0.0 when nothing was delivered); percent_overhead is control bits
    over all transmitted bits; anp is measured on true positions sampled
    every 10 s."""

    packets_sent: int
    packets_delivered: int
    mean_delay: float
    control_bits: int
    data_bits: int
    percent_overhead: float
    anp: float
    flows: dict[int, FlowStats]


def metrics_to_dict(m: RunMetrics) -> dict:
    """Plain-type view for structured output files."""
    return {
        "packets_sent": m.packets_sent,
        "packets_delivered": m.packets_delivered,
        "mean_delay_s": m.mean_delay,
        "control_bits": m.control_bits,
        "data_bits": m.data_bits,
        "percent_overhead": m.percent_overhead,
        "anp": m.anp,
        "flows": [{
            "flow": f.flow, "src": f.src, "dst": f.dst, "sent": f.sent,
            "delivered": f.delivered, "reply_sent": f.reply_sent,
            "reply_delivered": f.reply_delivered,
        } for f in m.flows.values()],
    }


def _draw_flows(scenario: Scenario, group_of: np.ndarray,
                stream: RngStream) -> list[tuple[int, int]]:
    tr = scenario.traffic
    rng = stream.rng
    n = scenario.n_nodes
    pairs: list[tuple[int, int]] = []
    for _ in range(tr.flows):
        while True:
            src = int(rng.integers(n))
            dst = int(rng.integers(n))
            if src == dst:
                continue
            if (tr.endpoint_rule == "cross_group"
                    and group_of[src] == group_of[dst]):
                continue
            pairs.append((src, dst))
            break
    return pairs


def run_scenario(scenario: Scenario, protocol: str, *,
                 seed: int | None = None,
                 preset: GeneratedScenario | None = None) -> RunMetrics:
    """Simulate one full mission and return its metrics.

    seed defaults to scenario.master_seed. preset substitutes
    ready-made mobility (e.g. imported plans) for the generator; it must
    cover exactly the scenario's node count.
    """
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}")
    check_scenario(scenario)
    if seed is None:
        seed = scenario.master_seed
    root = RngStream(seed, "run")

    if preset is None:
        gen = generate_scenario(scenario.group_spec(), scenario.duration,
                                scenario.radio_range,
                                root.substream("mobility"),
                                deviation_time=scenario.deviation_time)
    else:
        gen = preset
    n = len(gen.full_plans)
    if n != scenario.n_nodes:
        raise ScenarioError(
            [f"plans: {n} plans for {scenario.n_nodes} nodes"])

    engine = Engine()
    jitter_stream = root.substream("jitter")
    trajectories = [TrueTrajectory.from_stream(p, scenario.sigma_n,
                                               jitter_stream,
                                               scenario.deviation_time)
                    for p in gen.full_plans]
    # Vectorized equivalent of per-node true_position: all trajectories
    # share jitter_stream's key, and the white-noise hash separates nodes.
    table = PlanTable(gen.full_plans)
    jitter_key = jitter_stream.key64()
    ids = np.arange(n)
    sigma = float(scenario.sigma_n)
    memo: list = [-1, None]

    def positions_at(t_us: int) -> np.ndarray:
        if memo[0] != t_us:
            pos = table.positions_at(t_us / 1e6)
            if sigma > 0:
                pos = pos + gaussian_jitter(jitter_key, t_us, ids, sigma)
            memo[0], memo[1] = t_us, pos
        return memo[1]

    channel = ChannelParams(np.full(n, float(scenario.radio_range)),
                            scenario.hop_latency,
                            scenario.loss_probability)
    agents: list = []
    radio = Radio(engine, channel, positions_at,
                  lambda receiver, frame: agents[receiver].on_frame(frame),
                  loss_stream=(root.substream("loss")
                               if scenario.loss_probability > 0 else None))

    tr = scenario.traffic
    flow_pairs = _draw_flows(scenario, gen.group_of,
                             root.substream("traffic"))
    flows = {f: FlowStats(f, src, dst)
             for f, (src, dst) in enumerate(flow_pairs)}
    delays: list[float] = []
    sent = [0]

    def deliver(packet: Packet, now: float) -> None:
        delays.append(now - packet.send_time)
        st = flows[packet.flow]
        if packet.is_reply:
            st.reply_delivered += 1
            return
        st.delivered += 1
        if tr.kind == "echo":
            st.reply_sent += 1
            sent[0] += 1
            agents[packet.dst].send_data(
                Packet(packet.flow, packet.dst, packet.src,
                       tr.packet_bits, now, is_reply=True))

    if protocol == "tensr":
        params = scenario.tensr_params()
        visible = {p.node_id: p for p in gen.visible_plans}
        pli_tables = [PliTable() for _ in range(n)]
        agent_stream = root.substream("agents")
        agents.extend(
            TensrAgent(engine, radio, i, n, params, pli_tables[i],
                       visible, positions_at, agent_stream, deliver)
            for i in range(n))
        PliOracle(engine, scenario.pli, trajectories, pli_tables,
                  root.substream("pli")).start()
    else:
        agent_stream = root.substream("agents")
        agents.extend(
            BaselineAgent(engine, radio, i, n, scenario.baseline,
                          agent_stream, deliver) for i in range(n))
    for agent in agents:
        agent.start()

    def emit(flow: int, src: int, dst: int) -> None:
        sent[0] += 1
        flows[flow].sent += 1
        agents[src].send_data(
            Packet(flow, src, dst, tr.packet_bits, engine.now))

    n_packets = int(math.floor(scenario.duration * tr.rate + 1e-9))
    for f, (src, dst) in enumerate(flow_pairs):
        for k in range(1, n_packets + 1):
            engine.schedule(k / tr.rate,
                            lambda f=f, s=src, d=dst: emit(f, s, d))

    snapshots: list[np.ndarray] = []
    if n >= 2:
        def sample_anp() -> None:
            snapshots.append(neighbors(positions_at(engine.now_us),
                                       channel))

        sample_dt = scenario.group_spec().anp_sample_dt
        t = 0.0
        while t <= scenario.duration + 1e-9:
            engine.schedule(t, sample_anp)
            t += sample_dt

    engine.run_until(scenario.duration)

    c = radio.counters
    total_bits = c.control_bits + c.data_bits
    return RunMetrics(
        packets_sent=sent[0],
        packets_delivered=len(delays),
        mean_delay=float(np.mean(delays)) if delays else 0.0,
        control_bits=c.control_bits,
        data_bits=c.data_bits,
        percent_overhead=(c.control_bits / total_bits) if total_bits
        else 0.0,
        anp=anp(snapshots) if snapshots else 0.0,
        flows=flows)


# ------------------------------------------------------------- campaigns

@dataclass
class TrialRow:
    protocol: str
    n_groups: int
    nodes_per_group: int
    velocity: float
    trial: int
    delivered: int
    mean_delay_s: float
    control_bits: int
    data_bits: int
    percent_overhead: float
    anp: float


_CELL_FIELDS = ("delivered", "mean_delay_s", "control_bits", "data_bits",
                "percent_overhead", "anp")
CSV_COLUMNS = ("protocol", "groups", "nodes_per_group", "velocity",
               "trial") + _CELL_FIELDS


def _fmt(x) -> str:
    # shortest round-trip form: parse(emit(...)) recovers floats exactly
    return str(x) if isinstance(x, int) else repr(float(x))


@dataclass
class CampaignResult:
    rows: list[TrialRow]

    def cells(self) -> dict[tuple, list[TrialRow]]:
        """Rows grouped by (protocol, n_groups, nodes_per_group,
        velocity), preserving run order."""
        out: dict[tuple, list[TrialRow]] = {}
        for row in self.rows:
            key = (row.protocol, row.n_groups, row.nodes_per_group,
                   row.velocity)
            out.setdefault(key, []).append(row)
        return out

    def cell_means(self) -> dict[tuple, dict[str, float]]:
        return {key: {f: float(np.mean([getattr(r, f) for r in rows]))
                      for f in _CELL_FIELDS}
                for key, rows in self.cells().items()}

    def to_csv(self) -> str:
        """Per-trial rows plus one trial="mean" aggregate row per cell."""
        lines = [",".join(CSV_COLUMNS)]
        means = self.cell_means()
        for key, rows in self.cells().items():
            protocol, n_groups, nodes_per_group, velocity = key
            head = (protocol, str(n_groups), str(nodes_per_group),
                    _fmt(velocity))
            for r in rows:
                lines.append(",".join(
                    head + (str(r.trial),)
                    + tuple(_fmt(getattr(r, f)) for f in _CELL_FIELDS)))
            lines.append(",".join(
                head + ("mean",)
                + tuple(_fmt(means[key][f]) for f in _CELL_FIELDS)))
        return "\n".join(lines) + "\n"

    def summary_text(self) -> str:
        out = []
        for key, rows in self.cells().items():
            protocol, n_groups, nodes_per_group, velocity = key
            d = np.array([r.delivered for r in rows], dtype=float)
            se = (float(d.std(ddof=1)) / math.sqrt(len(d))
                  if len(d) > 1 else 0.0)
            m = self.cell_means()[key]
            out.append(
                f"{protocol:8s} {nodes_per_group} per group x "
                f"{n_groups} groups, v={_fmt(velocity)} m/s: "
                f"delivered {d.mean():.1f} +/- {se:.1f} (SE), "
                f"delay {m['mean_delay_s']:.4f} s, "
                f"overhead {m['percent_overhead']:.3f}, "
                f"anp {m['anp']:.4f}  [n={len(rows)}]")
        return "\n".join(out) + "\n"


def parse_csv(text: str) -> list[dict]:
    """Inverse of CampaignResult.to_csv (trial column stays a string:
    "0", "1", ... or "mean")."""
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        row: dict = {"protocol": rec["protocol"], "trial": rec["trial"]}
        row["groups"] = int(rec["groups"])
        row["nodes_per_group"] = int(rec["nodes_per_group"])
        row["velocity"] = float(rec["velocity"])
        for f in _CELL_FIELDS:
            row[f] = float(rec[f])
        out.append(row)
    return out


def _run_trial(args: tuple[Scenario, str, int]) -> TrialRow:
    scenario, protocol, trial = args
    m = run_scenario(scenario, protocol,
                     seed=stable_mix(scenario.master_seed, trial))
    return TrialRow(protocol, scenario.n_groups, scenario.nodes_per_group,
                    float(scenario.velocity), trial, m.packets_delivered,
                    m.mean_delay, m.control_bits, m.data_bits,
                    m.percent_overhead, m.anp)


def _map_trials(work: list, jobs: int) -> list[TrialRow]:
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_trial, work))
    return [_run_trial(w) for w in work]


def run_campaign(base: Scenario, *,
                 groupings=DEFAULT_GROUPINGS,
                 velocities=DEFAULT_VELOCITIES,
                 protocols=PROTOCOLS,
                 trials: int | None = None,
                 jobs: int = 1) -> CampaignResult:
    """Run every (protocol, grouping, velocity) cell for `trials` trials.

    Trial k of every cell uses stable_mix(master_seed, k), so the two
    protocols are compared on identical scenarios. Rows come back
    cell-major, trial-minor, whatever the worker scheduling did.
    """
    if not groupings or not velocities or not protocols:
        raise ValueError("empty campaign grid")
    if trials is None:
        trials = base.trials
    work: list[tuple[Scenario, str, int]] = []
    for protocol in protocols:
        if protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {protocol!r}")
        for nodes_per_group, n_groups in groupings:
            for velocity in velocities:
                cell = dataclasses.replace(
                    base, nodes_per_group=int(nodes_per_group),
                    n_groups=int(n_groups), velocity=float(velocity))
                check_scenario(cell)
                work.extend((cell, protocol, k) for k in range(trials))
    return CampaignResult(_map_trials(work, jobs))


# ------------------------------------------------------- interval sweep

@dataclass
class SweepPoint:
    protocol: str
    hello_interval: float
    delivered: float
    percent_overhead: float


def run_interval_sweep(base: Scenario, intervals=DEFAULT_SWEEP, *,
                       trials: int | None = None,
                       jobs: int = 1) -> list[SweepPoint]:
    """Trade control chatter against delivery: scale every periodic
    message from its default by a common factor (keeping each protocol's
    internal ratios: table exchanges at 8x the neighbor beacon, topology
    floods at 2.5x) and report each cell's mean operating point."""
    if trials is None:
        trials = base.trials
    work: list[tuple[Scenario, str, int]] = []
    meta: list[tuple[str, float]] = []
    for protocol in PROTOCOLS:
        for h in intervals:
            h = float(h)
            cell = dataclasses.replace(
                base,
                tensr=dataclasses.replace(
                    base.tensr, hello_interval=h, info_interval=8.0 * h),
                baseline=dataclasses.replace(
                    base.baseline, hello_interval=h, tc_interval=2.5 * h))
            check_scenario(cell)
            work.extend((cell, protocol, k) for k in range(trials))
            meta.append((protocol, h))
    rows = _map_trials(work, jobs)
    points = []
    for i, (protocol, h) in enumerate(meta):
        cell_rows = rows[i * trials:(i + 1) * trials]
        points.append(SweepPoint(
            protocol, h,
            float(np.mean([r.delivered for r in cell_rows])),
            float(np.mean([r.percent_overhead for r in cell_rows]))))
    return points
