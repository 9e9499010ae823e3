"""Traffic matrices over a topology's endpoints: generators, perturbation and CSV I/O."""
from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass
from typing import Mapping

from .topology import Topology


class TrafficError(ValueError):
    pass


@dataclass(frozen=True)
class TrafficMatrix:
    """Positive demands keyed by ordered (src, dst) node pairs; zero entries are dropped."""

    entries: Mapping[tuple[int, int], float]

    def __post_init__(self):
        clean = {}
        for (s, t), a in sorted(self.entries.items()):
            if s == t:
                raise TrafficError(f"self demand at node {s}")
            if a < 0 or math.isnan(a):
                raise TrafficError(f"negative demand for {(s, t)}")
            if a > 0:
                clean[(s, t)] = float(a)
        object.__setattr__(self, "entries", clean)

    @property
    def flows(self) -> list[tuple[int, int]]:
        return list(self.entries)

    def __getitem__(self, key):
        return self.entries.get(key, 0.0)

    def __len__(self):
        return len(self.entries)

    def total(self) -> float:
        return math.fsum(self.entries.values())

    def scaled(self, factor: float) -> "TrafficMatrix":
        return TrafficMatrix({k: a * factor for k, a in self.entries.items()})

    def __add__(self, other: "TrafficMatrix") -> "TrafficMatrix":
        out = dict(self.entries)
        for k, a in other.entries.items():
            out[k] = out.get(k, 0.0) + a
        return TrafficMatrix(out)


def _pairs(topo: Topology):
    eps = topo.endpoints
    if len(eps) < 2:
        raise TrafficError("need at least two endpoints")
    return [(s, t) for s in eps for t in eps if s != t]


def uniform_matrix(topo: Topology) -> TrafficMatrix:
    return TrafficMatrix({p: 1.0 for p in _pairs(topo)})


def _open_uniform(rng: random.Random) -> float:
    # random() is on [0, 1); redraw the (vanishingly rare) zero
    x = rng.random()
    while x == 0.0:
        x = rng.random()
    return x


def random_matrix(topo: Topology, seed: int) -> TrafficMatrix:
    rng = random.Random(seed)
    return TrafficMatrix({p: _open_uniform(rng) for p in _pairs(topo)})


def skewed_matrix(topo: Topology, hot_fraction: float = 0.2, hot_share: float = 0.8,
                  seed: int = 0) -> TrafficMatrix:
    """Uniform random demands, then the hot-sender -> hot-receiver block is rescaled
    to carry ``hot_share`` of the (unchanged) grand total.

    Hot senders and receivers are drawn independently and may overlap.
    """
    if not 0 < hot_fraction < 1 or not 0 < hot_share < 1:
        raise TrafficError("hot_fraction and hot_share must lie in (0, 1)")
    pairs = _pairs(topo)
    eps = list(topo.endpoints)
    n_hot = math.ceil(hot_fraction * len(eps) - 1e-9)
    if n_hot < 1:
        raise TrafficError("hot set is empty")
    rng = random.Random(seed)
    senders = set(rng.sample(eps, n_hot))
    receivers = set(rng.sample(eps, n_hot))
    demand = {p: _open_uniform(rng) for p in pairs}
    hot = [p for p in pairs if p[0] in senders and p[1] in receivers]
    if not hot:
        # a single node that is both the only hot sender and receiver
        raise TrafficError("hot sender/receiver sets admit no pair")
    total = math.fsum(demand.values())
    hot_sum = math.fsum(demand[p] for p in hot)
    cold_sum = total - hot_sum
    if cold_sum <= 0:
        # hot block covers every pair; only normalisation is left
        return TrafficMatrix(demand)
    hot_scale = hot_share * total / hot_sum
    cold_scale = (1 - hot_share) * total / cold_sum
    hot_set = set(hot)
    return TrafficMatrix({p: a * (hot_scale if p in hot_set else cold_scale) for p, a in demand.items()})


def perturb_matrix(m: TrafficMatrix, lo: float = 0.5, hi: float = 1.5, seed: int = 0) -> TrafficMatrix:
    if lo > hi or lo < 0:
        raise TrafficError("need 0 <= lo <= hi")
    rng = random.Random(seed)
    out = {}
    for k, a in m.entries.items():
        out[k] = a * rng.uniform(lo, hi)
    return TrafficMatrix(out)


def save_matrix(m: TrafficMatrix, topo: Topology) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["src", "dst", "demand"])
    for (s, t), a in m.entries.items():
        writer.writerow([topo.names[s], topo.names[t], repr(a)])
    return buf.getvalue()


def load_matrix(text: str, topo: Topology) -> TrafficMatrix:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != ["src", "dst", "demand"]:
        raise TrafficError("traffic CSV header must be src,dst,demand")
    entries = {}
    for row in reader:
        key = (topo.index(row["src"]), topo.index(row["dst"]))
        entries[key] = entries.get(key, 0.0) + float(row["demand"])
    return TrafficMatrix(entries)
