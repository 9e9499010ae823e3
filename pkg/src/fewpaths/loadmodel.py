"""Per-link load ledger, fluid ECMP baseline and utilization reports."""
from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .kpaths import EPS, PathError, shortest_tree
from .topology import Topology
from .traffic import TrafficMatrix

if TYPE_CHECKING:
    from .placement import MultipathPlan


class LoadLedger:
    """Traffic assigned to each directed link, indexed by link id."""

    def __init__(self, topo: Topology, loads=None):
        self.topo = topo
        self.load = list(loads) if loads is not None else [0.0] * len(topo.links)

    def add_path(self, path, amount: float) -> None:
        for lid in path.links:
            self.load[lid] += amount

    def utilization(self, lid: int) -> float:
        return self.load[lid] / self.topo.links[lid].capacity

    def utilizations(self) -> list[float]:
        return [self.load[i] / l.capacity for i, l in enumerate(self.topo.links)]

    def max_utilization(self) -> float:
        return max(self.utilizations(), default=0.0)

    def copy(self) -> "LoadLedger":
        return LoadLedger(self.topo, self.load)

    def as_dict(self) -> dict[tuple[str, str], float]:
        names = self.topo.names
        return {(names[l.src], names[l.dst]): self.load[l.id] for l in self.topo.links}

    def close_to(self, other: "LoadLedger", tol: float = 1e-9) -> bool:
        return all(abs(a - b) <= tol for a, b in zip(self.load, other.load))


def shortest_dag(topo: Topology, target: int) -> list[list[int]]:
    """Out-links of every node that lie on some shortest path to ``target``."""
    key = ("dag", target)
    if key not in topo.cache:
        dist = shortest_tree(topo, target).dist
        dag = [[] for _ in range(topo.n_nodes)]
        for link in topo.links:
            if abs(dist[link.src] - link.weight - dist[link.dst]) <= EPS * max(1.0, dist[link.src]):
                dag[link.src].append(link.id)
        topo.cache[key] = dag
    return topo.cache[key]


def ecmp_loads(topo: Topology, m: TrafficMatrix) -> LoadLedger:
    """Fluid ECMP: every node splits what it holds evenly over its shortest-path next hops."""
    ledger = LoadLedger(topo)
    by_dst = defaultdict(list)
    for (s, t), a in m.entries.items():
        by_dst[t].append((s, a))
    for t, sources in sorted(by_dst.items()):
        try:
            dist = shortest_tree(topo, t).dist
        except PathError as exc:
            raise PathError(f"ECMP: {exc}") from None
        dag = shortest_dag(topo, t)
        held = [0.0] * topo.n_nodes
        for s, a in sources:
            held[s] += a
        # farthest first is a topological order of the DAG (weights are positive)
        for v in sorted(range(topo.n_nodes), key=lambda x: -dist[x]):
            if v == t or held[v] == 0.0:
                continue
            share = held[v] / len(dag[v])
            for lid in dag[v]:
                ledger.load[lid] += share
                held[topo.links[lid].dst] += share
    return ledger


def plan_loads(topo: Topology, m: TrafficMatrix, plan: "MultipathPlan") -> LoadLedger:
    """Loads from splitting each demand evenly across its planned paths."""
    ledger = LoadLedger(topo)
    for key, a in m.entries.items():
        paths = plan.paths.get(key)
        if not paths:
            raise PathError(f"no planned path for flow {topo.names[key[0]]}->{topo.names[key[1]]}")
        for p in paths:
            ledger.add_path(p, a / len(paths))
    return ledger


@dataclass(frozen=True)
class LoadRow:
    link: int
    src: str
    dst: str
    load: float
    capacity: float
    utilization: float


@dataclass(frozen=True)
class LoadReport:
    rows: tuple[LoadRow, ...]  # ascending utilization

    @property
    def sorted_utilizations(self) -> list[float]:
        return [r.utilization for r in self.rows]

    @property
    def max_utilization(self) -> float:
        return self.rows[-1].utilization if self.rows else 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rank", "link_src", "link_dst", "load", "capacity", "utilization"])
        for rank, r in enumerate(self.rows, 1):
            w.writerow([rank, r.src, r.dst, repr(r.load), repr(r.capacity), repr(r.utilization)])
        return buf.getvalue()

    def to_curve(self) -> str:
        """Two-column ``rank utilization`` text for gnuplot."""
        lines = ["# rank utilization"]
        lines += [f"{rank} {r.utilization!r}" for rank, r in enumerate(self.rows, 1)]
        return "\n".join(lines) + "\n"


def report(ledger: LoadLedger) -> LoadReport:
    topo = ledger.topo
    rows = [
        LoadRow(l.id, topo.names[l.src], topo.names[l.dst], ledger.load[l.id], l.capacity,
                ledger.load[l.id] / l.capacity)
        for l in topo.links
    ]
    rows.sort(key=lambda r: (r.utilization, r.link))
    return LoadReport(tuple(rows))
