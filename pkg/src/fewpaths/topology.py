"""Directed-link network model, fat-tree / random generators and the text topology format.

A cable between two nodes is always stored as a pair of directed links with
consecutive ids (``2i`` is u->v, ``2i+1`` is v->u), which is what lets
:func:`save_topology` write the graph back out cable by cable.
"""
from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class TopologyError(ValueError):
    """Raised for malformed topologies or topology files."""


@dataclass(frozen=True)
class Link:
    id: int
    src: int
    dst: int
    weight: float = 1.0
    capacity: float = 1.0


@dataclass(frozen=True)
class Topology:
    names: tuple[str, ...]
    links: tuple[Link, ...]
    endpoints: tuple[int, ...]
    out_links: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    in_links: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    # memo for pure per-topology computations (shortest trees, path lists)
    cache: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        n = len(self.names)
        if n == 0:
            raise TopologyError("topology has no nodes")
        if len(set(self.names)) != n:
            raise TopologyError("duplicate node names")
        out = [[] for _ in range(n)]
        inc = [[] for _ in range(n)]
        for i, link in enumerate(self.links):
            if link.id != i:
                raise TopologyError(f"link ids must be dense, got {link.id} at position {i}")
            if not (0 <= link.src < n and 0 <= link.dst < n):
                raise TopologyError(f"link {i} references unknown node")
            if link.src == link.dst:
                raise TopologyError(f"link {i} is a self loop")
            if not (link.weight > 0 and link.capacity > 0):
                raise TopologyError(f"link {i} needs positive weight and capacity")
            out[link.src].append(i)
            inc[link.dst].append(i)
        if any(not 0 <= v < n for v in self.endpoints) or len(set(self.endpoints)) != len(self.endpoints):
            raise TopologyError("bad endpoint set")
        object.__setattr__(self, "out_links", tuple(map(tuple, out)))
        object.__setattr__(self, "in_links", tuple(map(tuple, inc)))
        object.__setattr__(self, "cache", {})

    @classmethod
    def from_cables(cls, names: Sequence[str], cables: Iterable[tuple], endpoints=None) -> "Topology":
        """Build from undirected cables ``(u, v[, weight[, capacity]])`` given as node indices."""
        links = []
        for cable in cables:
            u, v, *rest = cable
            w = float(rest[0]) if rest else 1.0
            c = float(rest[1]) if len(rest) > 1 else 1.0
            links.append(Link(len(links), u, v, w, c))
            links.append(Link(len(links), v, u, w, c))
        if endpoints is None:
            endpoints = range(len(names))
        return cls(tuple(names), tuple(links), tuple(sorted(endpoints)))

    @property
    def n_nodes(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._name_index[name]
        except KeyError:
            raise TopologyError(f"unknown node {name!r}") from None

    @property
    def _name_index(self) -> dict[str, int]:
        idx = self.cache.get("name_index")
        if idx is None:
            idx = self.cache["name_index"] = {name: i for i, name in enumerate(self.names)}
        return idx

    def link_between(self, u: int, v: int) -> Link:
        """Lowest-id link u->v."""
        for lid in self.out_links[u]:
            if self.links[lid].dst == v:
                return self.links[lid]
        raise TopologyError(f"no link {self.names[u]} -> {self.names[v]}")

    def cables(self):
        for i in range(0, len(self.links), 2):
            yield self.links[i]

    def is_strongly_connected(self) -> bool:
        return all(len(_reach(self, 0, fwd)) == self.n_nodes for fwd in (True, False))


def _reach(topo: Topology, start: int, forward: bool) -> set[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for lid in (topo.out_links[v] if forward else topo.in_links[v]):
            link = topo.links[lid]
            nxt = link.dst if forward else link.src
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def make_xgft(levels: int, children: Sequence[int], parents: Sequence[int]) -> Topology:
    """Extended generalized fat tree XGFT(h; m_1..m_h; w_1..w_h).

    A level-i node is labelled by the digits ``(a_h..a_{i+1}, b_i..b_1)`` with
    ``a_j < m_j`` and ``b_j < w_j``; it connects to the level-(i+1) nodes that
    keep its ``a_{i+2}..`` and ``b`` digits and pick any ``b_{i+1}``.
    Leaves (level 0) are the endpoints.
    """
    if levels < 1 or len(children) != levels or len(parents) != levels:
        raise TopologyError("need levels >= 1 and one child/parent count per level")
    if any(x < 1 for x in (*children, *parents)):
        raise TopologyError("child and parent counts must be positive")
    m, w = list(children), list(parents)

    def labels(i):
        # digit ranges written from the top level down
        ranges = [range(m[j - 1]) if j > i else range(w[j - 1]) for j in range(levels, 0, -1)]
        return _product(ranges)

    names, index = [], {}
    for i in range(levels + 1):
        for lab in labels(i):
            index[(i, lab)] = len(names)
            names.append(f"x{i}_" + ".".join(map(str, lab)))

    cables = []
    for i in range(1, levels + 1):
        pos = levels - i  # position of the level-i digit inside a label
        for lab in labels(i - 1):
            for b in range(w[i - 1]):
                up = lab[:pos] + (b,) + lab[pos + 1:]
                cables.append((index[(i - 1, lab)], index[(i, up)]))
    n_leaves = math.prod(m)
    return Topology.from_cables(names, cables, endpoints=range(n_leaves))


def _product(ranges):
    out = [()]
    for r in ranges:
        out = [t + (x,) for t in out for x in r]
    return out


def make_irregular(n_nodes: int, avg_degree: float, seed: int) -> Topology:
    """Seeded connected random graph: a random spanning tree plus random extra cables."""
    if n_nodes < 3 or avg_degree < 2:
        raise TopologyError("need n_nodes >= 3 and avg_degree >= 2")
    target = round(n_nodes * avg_degree / 2)
    if target > n_nodes * (n_nodes - 1) // 2:
        raise TopologyError(f"degree {avg_degree} impossible in a simple graph on {n_nodes} nodes")
    rng = random.Random(seed)
    order = list(range(n_nodes))
    rng.shuffle(order)
    pairs = set()
    for i in range(1, n_nodes):
        u, v = order[i], order[rng.randrange(i)]
        pairs.add((min(u, v), max(u, v)))
    while len(pairs) < target:
        u, v = rng.sample(range(n_nodes), 2)
        pairs.add((min(u, v), max(u, v)))
    return Topology.from_cables([f"n{i}" for i in range(n_nodes)], sorted(pairs))


def _num(x: float) -> str:
    return repr(float(x))


def save_topology(topo: Topology) -> str:
    lines = [f"node {name}" for name in topo.names]
    for link in topo.cables():
        lines.append(f"link {topo.names[link.src]} {topo.names[link.dst]} {_num(link.weight)} {_num(link.capacity)}")
    if len(topo.endpoints) != topo.n_nodes:
        lines.extend(f"endpoint {topo.names[v]}" for v in topo.endpoints)
    return "\n".join(lines) + "\n"


def load_topology(text: str) -> Topology:
    names, index, cables, endpoints = [], {}, [], []

    def node(tok, lineno):
        if tok not in index:
            raise TopologyError(f"line {lineno}: unknown node {tok!r}")
        return index[tok]

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind, *args = line.split()
        if kind == "node" and len(args) == 1:
            if args[0] in index:
                raise TopologyError(f"line {lineno}: duplicate node {args[0]!r}")
            index[args[0]] = len(names)
            names.append(args[0])
        elif kind == "link" and len(args) == 4:
            u, v = node(args[0], lineno), node(args[1], lineno)
            try:
                w, c = float(args[2]), float(args[3])
            except ValueError:
                raise TopologyError(f"line {lineno}: weight/capacity must be numbers") from None
            if not (w > 0 and c > 0) or math.isinf(w) or math.isinf(c):
                raise TopologyError(f"line {lineno}: weight and capacity must be positive and finite")
            if u == v:
                raise TopologyError(f"line {lineno}: self loop")
            cables.append((u, v, w, c))
        elif kind == "endpoint" and len(args) == 1:
            endpoints.append(node(args[0], lineno))
        else:
            raise TopologyError(f"line {lineno}: cannot parse {raw.strip()!r}")
    if not names:
        raise TopologyError("line 1: no node section")
    return Topology.from_cables(names, cables, endpoints or None)


def read_topology(path) -> Topology:
    with open(path) as fh:
        return load_topology(fh.read())


def write_topology(topo: Topology, path) -> None:
    with open(path, "w") as fh:
        fh.write(save_topology(topo))
