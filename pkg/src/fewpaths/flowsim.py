"""Event-driven flow-level simulation: Poisson CBR flows pinned to one path each."""
from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, replace
from typing import Sequence

from .kpaths import Path
from .loadmodel import shortest_dag
from .topology import Topology
from .traffic import TrafficMatrix


class SimError(ValueError):
    pass


@dataclass(frozen=True)
class FlowEvent:
    src: int
    dst: int
    rate: float
    arrival: float
    holding: float
    path: Path | None = None

    @property
    def departure(self) -> float:
        return self.arrival + self.holding


def default_flow_rate(m: TrafficMatrix) -> float:
    return max(m.entries.values(), default=1.0) / 20


def generate_flows(m: TrafficMatrix, mean_holding: float = 10.0, flow_rate: float | None = None,
                   horizon: float = 100.0, seed: int = 0) -> list[FlowEvent]:
    """Per pair, arrivals at rate demand / (flow_rate * mean_holding) on [0, horizon]
    with exponential holding times, so the offered load matches the demand."""
    if flow_rate is None:
        flow_rate = default_flow_rate(m)
    if not (mean_holding > 0 and flow_rate > 0 and horizon > 0):
        raise SimError("mean_holding, flow_rate and horizon must be positive")
    rng = random.Random(seed)
    flows = []
    for (s, t), a in m.entries.items():
        lam = a / (flow_rate * mean_holding)
        clock = rng.expovariate(lam)
        while clock <= horizon:
            hold = rng.expovariate(1 / mean_holding)
            while hold == 0.0:
                hold = rng.expovariate(1 / mean_holding)
            flows.append(FlowEvent(s, t, flow_rate, clock, hold))
            clock += rng.expovariate(lam)
    flows.sort(key=lambda f: (f.arrival, f.src, f.dst))
    return flows


class PlanPolicy:
    """Each flow takes one of its pair's planned paths, uniformly."""

    def __init__(self, plan):
        self.plan = plan

    def allows(self, f: FlowEvent, path: Path) -> bool:
        return path in self.plan.paths.get((f.src, f.dst), ())

    def choose(self, f: FlowEvent, rng: random.Random) -> Path:
        paths = self.plan.paths.get((f.src, f.dst))
        if not paths:
            raise SimError(f"no planned path for flow {f.src}->{f.dst}")
        return paths[rng.randrange(len(paths))]


class EcmpPolicy:
    """Per-flow ECMP: every hop hashes the flow onto one of its equal-cost next hops."""

    def __init__(self, topo: Topology):
        self.topo = topo

    def allows(self, f: FlowEvent, path: Path) -> bool:
        dag = shortest_dag(self.topo, f.dst)
        return path.src == f.src and path.dst == f.dst and all(
            l in dag[self.topo.links[l].src] for l in path.links)

    def choose(self, f: FlowEvent, rng: random.Random) -> Path:
        topo = self.topo
        dag = shortest_dag(topo, f.dst)
        v, nodes, links = f.src, [f.src], []
        while v != f.dst:
            if not dag[v]:
                raise SimError(f"node {topo.names[v]} cannot reach {topo.names[f.dst]}")
            lid = dag[v][rng.randrange(len(dag[v]))]
            links.append(lid)
            v = topo.links[lid].dst
            nodes.append(v)
        return Path(tuple(nodes), tuple(links), math.fsum(topo.links[l].weight for l in links))


@dataclass
class SimTrace:
    times: list[float]
    max_load: list[float]  # value holding from times[i] until times[i+1]
    flows: list[FlowEvent]  # with assigned paths
    n_links: int
    snapshots: dict[float, list[float]]

    def window_average_max(self, start: float, end: float) -> float:
        """Time average of the max-link-load step function over [start, end]."""
        if end <= start:
            raise SimError("empty window")
        area = 0.0
        for i, t0 in enumerate(self.times):
            t1 = self.times[i + 1] if i + 1 < len(self.times) else math.inf
            lo, hi = max(t0, start), min(t1, end)
            if hi > lo:
                area += self.max_load[i] * (hi - lo)
        return area / (end - start)

    def link_average_loads(self, start: float, end: float) -> list[float]:
        acc = [0.0] * self.n_links
        for f in self.flows:
            overlap = min(f.departure, end) - max(f.arrival, start)
            if overlap > 0:
                for l in f.path.links:
                    acc[l] += f.rate * overlap
        return [x / (end - start) for x in acc]

    def to_csv(self) -> str:
        lines = ["time,max_link_load"]
        lines += [f"{t!r},{v!r}" for t, v in zip(self.times, self.max_load)]
        return "\n".join(lines) + "\n"


def measurement_window(horizon: float) -> tuple[float, float]:
    return 0.2 * horizon, 0.8 * horizon


def simulate(topo: Topology, policy, flows: Sequence[FlowEvent], seed: int = 0,
             probe_times: Sequence[float] = ()) -> SimTrace:
    """Replay arrivals and departures, pinning each arriving flow to one path.

    Flows that already carry a path keep it (it must be one the policy allows).
    ``probe_times`` asks for copies of the per-link loads at those instants.
    """
    rng = random.Random(seed)
    load = [0.0] * len(topo.links)
    assigned = []
    events = []
    for f in sorted(flows, key=lambda f: (f.arrival, f.src, f.dst)):
        if f.path is None:
            f = replace(f, path=policy.choose(f, rng))
        elif not policy.allows(f, f.path):
            raise SimError(f"flow {f.src}->{f.dst} pinned to a path outside the policy")
        idx = len(assigned)
        assigned.append(f)
        # departures sort before arrivals at the same instant
        events.append((f.arrival, 1, idx))
        events.append((f.departure, 0, idx))
    heapq.heapify(events)
    probes = sorted(probe_times)
    snapshots = {}
    times, maxes = [0.0], [0.0]
    while events:
        t, kind, idx = heapq.heappop(events)
        while probes and probes[0] < t:
            snapshots[probes.pop(0)] = list(load)
        f = assigned[idx]
        delta = f.rate if kind == 1 else -f.rate
        for l in f.path.links:
            load[l] += delta
            if abs(load[l]) < 1e-12:
                load[l] = 0.0
        peak = max(load)
        if t == times[-1]:
            maxes[-1] = peak
        else:
            times.append(t)
            maxes.append(peak)
    for p in probes:
        snapshots[p] = list(load)
    return SimTrace(times, maxes, assigned, len(topo.links), snapshots)
