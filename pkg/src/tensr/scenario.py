"""Run configuration: one Scenario dataclass covering every knob a
simulation needs, YAML round-trip with strict key checking, range
validation, and waypoint-plan import/export."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, get_type_hints

import numpy as np
import yaml

from .agents import BaselineParams, TensrParams
from .estimator import EstimatorParams
from .mobility import GroupScenario, MobilityPlan
from .pli import PliParams


class ScenarioError(ValueError):
    """Malformed or out-of-range configuration. `problems` lists one
    human-readable entry per offending field."""

    def __init__(self, problems: Iterable[str]):
        self.problems = list(problems)
        super().__init__(
            "invalid scenario:\n  " + "\n  ".join(self.problems))


@dataclass
class EstimatorConfig:
    """Scalar estimator knobs; the per-node arrays (sigma_n, v_max, d_max)
    are derived from the scenario's top-level fields."""

    alpha: float = 0.05
    pli_staleness_threshold: float = 10.0
    social_staleness_threshold: float = 60.0
    p0: float = 0.01


@dataclass
class TrafficSpec:
    """Application traffic: `flows` constant-rate unicast streams.

    kind "echo" makes the destination answer each delivered packet with
    an equal-size reply; "cbr" is one-way. endpoint_rule "cross_group"
    draws source and destination from different groups, "any" only
    requires distinct nodes.
    """

    kind: str = "echo"
    flows: int = 6
    packet_bits: int = 1024
    rate: float = 1.0
    endpoint_rule: str = "cross_group"


@dataclass
class Scenario:
    """Everything one run needs, with defaults for the standard setup:
    21 nodes in 7 groups over a 1500 m square, a 10-minute mission, and
    plans that silently stop being followed halfway through."""

    nodes_per_group: int = 3
    n_groups: int = 7
    duration: float = 600.0
    deviation_time: float = 300.0
    velocity: float = 20.0
    sigma_n: float = 10.0
    radio_range: float = 500.0
    area: tuple[float, float] = (1500.0, 1500.0)
    anp_threshold: float = 0.01
    trials: int = 30
    master_seed: int = 1
    hop_latency: float = 0.002
    loss_probability: float = 0.0
    tensr: TensrParams = field(default_factory=TensrParams)
    baseline: BaselineParams = field(default_factory=BaselineParams)
    pli: PliParams = field(default_factory=PliParams)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    traffic: TrafficSpec = field(default_factory=TrafficSpec)

    @property
    def n_nodes(self) -> int:
        return self.n_groups * self.nodes_per_group

    def group_spec(self) -> GroupScenario:
        return GroupScenario(self.n_groups, self.nodes_per_group,
                             (float(self.area[0]), float(self.area[1])),
                             self.velocity,
                             anp_threshold=self.anp_threshold)

    def estimator_params(self) -> EstimatorParams:
        e = self.estimator
        return EstimatorParams.uniform(
            self.n_nodes, sigma_n=self.sigma_n, v_max=self.velocity,
            d_max=self.radio_range, pli=self.pli, alpha=e.alpha,
            pli_staleness_threshold=e.pli_staleness_threshold,
            social_staleness_threshold=e.social_staleness_threshold,
            p0=e.p0)

    def tensr_params(self) -> TensrParams:
        """The protocol parameter block with the estimator attached."""
        return dataclasses.replace(self.tensr,
                                   estimator=self.estimator_params())


# ------------------------------------------------------- dict round-trip

_SECTIONS: dict[str, type] = {
    "tensr": TensrParams,
    "baseline": BaselineParams,
    "pli": PliParams,
    "estimator": EstimatorConfig,
    "traffic": TrafficSpec,
}
# estimator arrays are derived, never configured directly
_SKIP_FIELDS: dict[str, set[str]] = {"tensr": {"estimator"}}


def _section_dict(obj: Any, skip: set[str]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for f in dataclasses.fields(obj):
        if f.name in skip:
            continue
        v = getattr(obj, f.name)
        if isinstance(v, tuple):
            v = [list(p) if isinstance(p, tuple) else p for p in v]
        out[f.name] = v
    return out


def scenario_to_dict(s: Scenario) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for f in dataclasses.fields(Scenario):
        if f.name in _SECTIONS:
            continue
        v = getattr(s, f.name)
        out[f.name] = list(v) if isinstance(v, tuple) else v
    for name in _SECTIONS:
        out[name] = _section_dict(getattr(s, name),
                                  _SKIP_FIELDS.get(name, set()))
    return out


def _coerce(value: Any, target: type, path: str,
            problems: list[str]) -> Any:
    if target is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            problems.append(f"{path}: expected a number, got {value!r}")
            return 0.0
        return float(value)
    if target is int:
        if isinstance(value, bool) or not isinstance(value, int):
            problems.append(f"{path}: expected an integer, got {value!r}")
            return 0
        return value
    if target is bool:
        if not isinstance(value, bool):
            problems.append(f"{path}: expected true/false, got {value!r}")
            return False
        return value
    if target is str:
        if not isinstance(value, str):
            problems.append(f"{path}: expected a string, got {value!r}")
            return ""
        return value
    raise TypeError(f"unhandled config field type {target!r} at {path}")


def _coerce_breakpoints(value: Any, path: str,
                        problems: list[str]) -> tuple:
    default = PliParams().sigma_p_breakpoints
    if not isinstance(value, (list, tuple)) or len(value) == 0:
        problems.append(f"{path}: expected a list of [tau, sigma] pairs")
        return default
    out = []
    for k, pair in enumerate(value):
        if (not isinstance(pair, (list, tuple)) or len(pair) != 2
                or any(isinstance(x, bool) or not isinstance(x, (int, float))
                       for x in pair)):
            problems.append(f"{path}[{k}]: expected a [tau, sigma] pair")
            return default
        out.append((float(pair[0]), float(pair[1])))
    return tuple(out)


def _coerce_area(value: Any, problems: list[str]) -> tuple[float, float]:
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or any(isinstance(x, bool) or not isinstance(x, (int, float))
                   for x in value)):
        problems.append(f"area: expected [width, height], got {value!r}")
        return (1500.0, 1500.0)
    return (float(value[0]), float(value[1]))


def _build_section(cls: type, data: dict, path: str,
                   problems: list[str], skip: set[str]) -> Any:
    hints = get_type_hints(cls)
    known = {f.name for f in dataclasses.fields(cls)} - skip
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        where = f"{path}.{key}"
        if key not in known:
            problems.append(f"{where}: unknown key")
        elif key == "sigma_p_breakpoints":
            kwargs[key] = _coerce_breakpoints(value, where, problems)
        else:
            kwargs[key] = _coerce(value, hints[key], where, problems)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        problems.append(f"{path}: {exc}")
        return cls()


def scenario_from_dict(data: Any) -> Scenario:
    """Build a Scenario from a nested dict; unknown keys and wrong types
    raise ScenarioError with every problem listed. Range checks are
    validate_scenario's job."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ScenarioError(["config root must be a mapping"])
    problems: list[str] = []
    hints = get_type_hints(Scenario)
    scalars = {f.name for f in dataclasses.fields(Scenario)} - set(_SECTIONS)
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                problems.append(f"{key}: expected a mapping")
                continue
            kwargs[key] = _build_section(_SECTIONS[key], value, key,
                                         problems,
                                         _SKIP_FIELDS.get(key, set()))
        elif key == "area":
            kwargs[key] = _coerce_area(value, problems)
        elif key in scalars:
            kwargs[key] = _coerce(value, hints[key], key, problems)
        else:
            problems.append(f"{key}: unknown key")
    if problems:
        raise ScenarioError(problems)
    return Scenario(**kwargs)


def validate_scenario(s: Scenario) -> list[str]:
    """Range-check every field; returns one message per problem (empty
    list when the scenario is runnable)."""
    p: list[str] = []

    def number(path: str, v: Any) -> bool:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            p.append(f"{path}: expected a number, got {v!r}")
            return False
        return True

    def positive(path: str, v: Any, *, finite: bool = True) -> None:
        if number(path, v) and not (v > 0 and (math.isfinite(v)
                                               or not finite)):
            p.append(f"{path}: must be positive, got {v!r}")

    def nonneg(path: str, v: Any) -> None:
        if number(path, v) and not (v >= 0 and math.isfinite(v)):
            p.append(f"{path}: must be >= 0, got {v!r}")

    def count(path: str, v: Any, lo: int = 1) -> None:
        if isinstance(v, bool) or not isinstance(v, int) or v < lo:
            p.append(f"{path}: must be an integer >= {lo}, got {v!r}")

    def unit(path: str, v: Any, *, closed_top: bool = True) -> None:
        if number(path, v) and not (0 <= v <= 1 and
                                    (closed_top or v < 1)):
            top = "1" if closed_top else "1 (exclusive)"
            p.append(f"{path}: must be in 0..{top}, got {v!r}")

    count("n_groups", s.n_groups)
    count("nodes_per_group", s.nodes_per_group)
    positive("duration", s.duration)
    positive("deviation_time", s.deviation_time, finite=False)
    positive("velocity", s.velocity)
    nonneg("sigma_n", s.sigma_n)
    positive("radio_range", s.radio_range)
    positive("area width", s.area[0])
    positive("area height", s.area[1])
    if number("anp_threshold", s.anp_threshold) and not (
            0 < s.anp_threshold <= 1):
        p.append(f"anp_threshold: must be in (0, 1], got "
                 f"{s.anp_threshold!r}")
    count("trials", s.trials)
    if isinstance(s.master_seed, bool) or not isinstance(s.master_seed, int):
        p.append(f"master_seed: must be an integer, got {s.master_seed!r}")
    positive("hop_latency", s.hop_latency)
    unit("loss_probability", s.loss_probability, closed_top=False)

    t = s.tensr
    positive("tensr.hello_interval", t.hello_interval)
    positive("tensr.info_interval", t.info_interval)
    positive("tensr.tie_interval", t.tie_interval)
    count("tensr.r_mem", t.r_mem)
    positive("tensr.neighbor_timeout_factor", t.neighbor_timeout_factor)
    positive("tensr.route_recompute", t.route_recompute)
    count("tensr.max_info_rows", t.max_info_rows)
    count("tensr.max_expanded_rows", t.max_expanded_rows, lo=0)
    count("tensr.hop_limit", t.hop_limit)
    unit("tensr.jitter_frac", t.jitter_frac, closed_top=False)
    if t.estimator is not None:
        p.append("tensr.estimator: derived at run time, must not be set "
                 "in a scenario")

    b = s.baseline
    positive("baseline.hello_interval", b.hello_interval)
    positive("baseline.tc_interval", b.tc_interval)
    positive("baseline.link_hold", b.link_hold)
    positive("baseline.topology_hold", b.topology_hold)
    positive("baseline.route_recompute", b.route_recompute)
    count("baseline.hop_limit", b.hop_limit)
    unit("baseline.jitter_frac", b.jitter_frac, closed_top=False)

    pli = s.pli
    positive("pli.broadcast_interval", pli.broadcast_interval)
    nonneg("pli.interval_jitter", pli.interval_jitter)
    unit("pli.reach_probability", pli.reach_probability)
    nonneg("pli.broadcast_delay", pli.broadcast_delay)
    bps = pli.sigma_p_breakpoints
    if len(bps) == 0:
        p.append("pli.sigma_p_breakpoints: must not be empty")
    else:
        taus = [bp[0] for bp in bps]
        if any(b2 <= a2 for a2, b2 in zip(taus, taus[1:])):
            p.append("pli.sigma_p_breakpoints: staleness values must be "
                     "strictly increasing")
        if any(bp[1] < 0 for bp in bps):
            p.append("pli.sigma_p_breakpoints: sigma values must be >= 0")

    e = s.estimator
    if number("estimator.alpha", e.alpha) and not (0 < e.alpha < 1):
        p.append(f"estimator.alpha: must be in (0, 1), got {e.alpha!r}")
    positive("estimator.pli_staleness_threshold",
             e.pli_staleness_threshold)
    positive("estimator.social_staleness_threshold",
             e.social_staleness_threshold)
    unit("estimator.p0", e.p0)

    tr = s.traffic
    if tr.kind not in ("cbr", "echo"):
        p.append(f"traffic.kind: must be 'cbr' or 'echo', got {tr.kind!r}")
    if tr.endpoint_rule not in ("cross_group", "any"):
        p.append("traffic.endpoint_rule: must be 'cross_group' or 'any', "
                 f"got {tr.endpoint_rule!r}")
    count("traffic.flows", tr.flows, lo=0)
    count("traffic.packet_bits", tr.packet_bits)
    positive("traffic.rate", tr.rate)
    if tr.flows > 0:
        if tr.endpoint_rule == "cross_group" and s.n_groups < 2:
            p.append("traffic.flows: cross-group endpoints need "
                     "n_groups >= 2")
        if tr.endpoint_rule == "any" and s.n_nodes < 2:
            p.append("traffic.flows: flows need at least 2 nodes")
    return p


def check_scenario(s: Scenario) -> Scenario:
    """validate_scenario, raising ScenarioError on any problem."""
    problems = validate_scenario(s)
    if problems:
        raise ScenarioError(problems)
    return s


# ---------------------------------------------------------------- YAML

def scenario_to_yaml(s: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(s), sort_keys=False)


def scenario_from_yaml(text: str) -> Scenario:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError([f"config is not valid YAML: {exc}"]) from exc
    return scenario_from_dict(data)


def load_scenario(path: str | Path) -> Scenario:
    return scenario_from_yaml(Path(path).read_text())


# -------------------------------------------------- plan import/export

def plans_to_dict(plans: Iterable[MobilityPlan]) -> dict[str, Any]:
    items = []
    for plan in plans:
        items.append({
            "node_id": int(plan.node_id),
            "horizon": float(plan.horizon),
            "waypoints": [[float(t), float(pt[0]), float(pt[1])]
                          for t, pt in zip(plan.times, plan.points)],
        })
    return {"plans": items}


def plans_from_dict(data: Any) -> list[MobilityPlan]:
    if (not isinstance(data, dict) or set(data) != {"plans"}
            or not isinstance(data["plans"], list)):
        raise ScenarioError(
            ["plan document must be a mapping with one 'plans' list"])
    problems: list[str] = []
    out: list[MobilityPlan] = []
    for k, item in enumerate(data["plans"]):
        path = f"plans[{k}]"
        if not isinstance(item, dict):
            problems.append(f"{path}: expected a mapping")
            continue
        for key in sorted(set(item) - {"node_id", "horizon", "waypoints"}):
            problems.append(f"{path}.{key}: unknown key")
        wps = item.get("waypoints")
        if (not isinstance(wps, list) or len(wps) == 0
                or any(not isinstance(w, (list, tuple)) or len(w) != 3
                       for w in wps)):
            problems.append(f"{path}.waypoints: expected a non-empty list "
                            "of [t, x, y] triples")
            continue
        try:
            out.append(MobilityPlan(
                int(item.get("node_id", k)),
                np.array([w[0] for w in wps], dtype=float),
                np.array([[w[1], w[2]] for w in wps], dtype=float),
                horizon=float(item.get("horizon", math.inf))))
        except (TypeError, ValueError) as exc:
            problems.append(f"{path}: {exc}")
    if problems:
        raise ScenarioError(problems)
    return out


def plans_to_yaml(plans: Iterable[MobilityPlan]) -> str:
    return yaml.safe_dump(plans_to_dict(plans), sort_keys=False)


def plans_from_yaml(text: str) -> list[MobilityPlan]:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError([f"plan file is not valid YAML: {exc}"]) from exc
    return plans_from_dict(data)


def load_plans(path: str | Path) -> list[MobilityPlan]:
    return plans_from_yaml(Path(path).read_text())
