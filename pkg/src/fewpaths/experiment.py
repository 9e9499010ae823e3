"""End-to-end scenario runner driven by a JSON config."""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path as FsPath

from . import flowsim, loadmodel, placement, topology, traffic


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    name: str
    topology: dict
    traffic: dict
    planner: dict = field(default_factory=dict)
    sweep_k: list | None = None
    simulation: dict | None = None
    out_dir: str = "out"
    base_dir: str = field(default=".", repr=False)  # where relative file paths resolve

    @classmethod
    def from_json(cls, text: str, base_dir: str = ".") -> "ExperimentConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        known = {"name", "topology", "traffic", "planner", "sweep_k", "simulation", "out_dir"}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**doc, base_dir=base_dir)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(fh.read(), base_dir=os.path.dirname(os.path.abspath(path)))

    def resolved(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        d.pop("out_dir")
        return d

    def digest(self) -> str:
        blob = json.dumps(self.resolved(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _resolve(cfg: ExperimentConfig, rel: str) -> str:
    return rel if os.path.isabs(rel) else os.path.join(cfg.base_dir, rel)


def build_topology(cfg: ExperimentConfig) -> topology.Topology:
    spec = dict(cfg.topology)
    kind = spec.pop("kind", None)
    if kind == "xgft":
        return topology.make_xgft(spec["levels"], spec["children"], spec["parents"])
    if kind == "irregular":
        return topology.make_irregular(spec["nodes"], spec["degree"], spec.get("seed", 0))
    if kind == "file":
        return topology.read_topology(_resolve(cfg, spec["path"]))
    raise ConfigError(f"unknown topology kind {kind!r}")


def build_traffic(cfg: ExperimentConfig, topo: topology.Topology) -> traffic.TrafficMatrix:
    spec = cfg.traffic
    kind = spec.get("kind")
    seed = spec.get("seed", 0)
    if kind == "uniform":
        m = traffic.uniform_matrix(topo)
    elif kind == "random":
        m = traffic.random_matrix(topo, seed)
    elif kind == "skewed":
        m = traffic.skewed_matrix(topo, spec.get("hot_fraction", 0.2), spec.get("hot_share", 0.8), seed)
    elif kind == "file":
        with open(_resolve(cfg, spec["path"])) as fh:
            m = traffic.load_matrix(fh.read(), topo)
    else:
        raise ConfigError(f"unknown traffic kind {kind!r}")
    if spec.get("perturb"):
        p = spec["perturb"]
        m = traffic.perturb_matrix(m, p.get("lo", 0.5), p.get("hi", 1.5), p.get("seed", 0))
    return m


def make_plan(topo, m, spec: dict) -> placement.MultipathPlan:
    theta = placement.parse_theta(spec.get("theta", placement.DEFAULT_THETA))
    kind = placement.CostFunction(spec.get("cost", "max"), spec.get("exponent", 2.0))
    seed = spec.get("seed", 0)
    k = spec.get("k", 4)
    if spec.get("adaptive", False):
        plan = placement.plan_adaptive_k(topo, m, k, theta, kind, seed, strict=spec.get("strict", False))
    else:
        plan = placement.plan_fixed_k(topo, m, k, theta, kind, seed)
    if spec.get("finetune", False):
        plan = placement.finetune(topo, m, plan, theta, spec.get("max_rounds", 100), seed)
    return plan


def sweep_k(topo, m, k_values, spec: dict) -> str:
    lines = ["k,max_utilization"]
    for k in k_values:
        plan = make_plan(topo, m, dict(spec, k=k))
        lines.append(f"{k},{plan.max_utilization()!r}")
    return "\n".join(lines) + "\n"


def run_simulation(topo, m, plan, spec: dict) -> str:
    horizon = spec.get("horizon", 100.0)
    flows = flowsim.generate_flows(m, spec.get("mean_holding", 10.0), spec.get("flow_rate"),
                                   horizon, spec.get("seed", 0))
    window = flowsim.measurement_window(horizon)
    out = []
    for label, policy in (("plan", flowsim.PlanPolicy(plan)), ("ecmp", flowsim.EcmpPolicy(topo))):
        trace = flowsim.simulate(topo, policy, flows, spec.get("seed", 0))
        out.append((label, trace))
    lines = ["policy,time,max_link_load"]
    for label, trace in out:
        lines += [f"{label},{t!r},{v!r}" for t, v in zip(trace.times, trace.max_load)]
    for label, trace in out:
        lines.append(f"# {label} window_avg_max {trace.window_average_max(*window)!r}")
    return "\n".join(lines) + "\n"


def run_experiment(cfg: ExperimentConfig, out_dir: str | None = None) -> dict[str, str]:
    """Compute every artifact in memory, then write them all; returns kind -> file path.

    Nothing is written if any stage fails.
    """
    topo = build_topology(cfg)
    m = build_traffic(cfg, topo)
    plan = make_plan(topo, m, cfg.planner)
    ecmp_report = loadmodel.report(loadmodel.ecmp_loads(topo, m))
    plan_report = loadmodel.report(loadmodel.plan_loads(topo, m, plan))
    digest = cfg.digest()
    plan.params["config"] = digest

    artifacts = {
        "config": json.dumps(dict(cfg.resolved(), config_hash=digest), indent=1, sort_keys=True) + "\n",
        "topo": topology.save_topology(topo),
        "traffic": traffic.save_matrix(m, topo),
        "plan": plan.to_json(topo),
        "ecmp_loads": ecmp_report.to_csv(),
        "ecmp_curve": ecmp_report.to_curve(),
        "plan_loads": plan_report.to_csv(),
        "plan_curve": plan_report.to_curve(),
    }
    if cfg.sweep_k:
        artifacts["sweep_k"] = sweep_k(topo, m, cfg.sweep_k, cfg.planner)
    if cfg.simulation:
        artifacts["trace"] = run_simulation(topo, m, plan, cfg.simulation)

    suffix = {"config": "json", "topo": "txt", "traffic": "csv", "plan": "json",
              "ecmp_curve": "dat", "plan_curve": "dat"}
    target = FsPath(out_dir or _resolve(cfg, cfg.out_dir))
    target.mkdir(parents=True, exist_ok=True)
    written = {}
    for kind, text in artifacts.items():
        path = target / f"{cfg.name}-{digest}.{kind}.{suffix.get(kind, 'csv')}"
        path.write_text(text)
        written[kind] = str(path)
    return written
