"""Shortest-path trees and loop-free path enumeration by sidetrack-edge sets.

A path from s to t is encoded relative to the shortest-path tree toward t as
the set of non-tree ("sidetrack") links it uses.  Each sidetrack link u->v
adds ``c(e) = d(v) - d(u) + w(e) >= 0`` to the shortest distance, so a best-first
search over sidetrack sets yields paths in non-decreasing length.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .topology import Topology

EPS = 1e-9
DEFAULT_MAX_PATHS = 1000


class PathError(ValueError):
    pass


@dataclass(frozen=True)
class ShortestPathTree:
    target: int
    dist: tuple[float, ...]
    parent_link: tuple[int | None, ...]  # tree arc leaving each node toward target

    def is_tree_arc(self, link_id: int, topo: Topology) -> bool:
        return self.parent_link[topo.links[link_id].src] == link_id


@dataclass(frozen=True)
class Path:
    nodes: tuple[int, ...]
    links: tuple[int, ...]
    length: float

    @property
    def src(self) -> int:
        return self.nodes[0]

    @property
    def dst(self) -> int:
        return self.nodes[-1]

    def __len__(self):
        return len(self.links)

    @classmethod
    def from_nodes(cls, topo: Topology, nodes) -> "Path":
        links = tuple(topo.link_between(u, v).id for u, v in zip(nodes, nodes[1:]))
        if len(set(nodes)) != len(nodes):
            raise PathError(f"path revisits a node: {nodes}")
        return cls(tuple(nodes), links, math.fsum(topo.links[l].weight for l in links))

    def label(self, topo: Topology) -> str:
        return "-".join(topo.names[v] for v in self.nodes)


def shortest_tree(topo: Topology, target: int) -> ShortestPathTree:
    """Dijkstra toward ``target`` over reversed links; parent ties go to the smallest link id."""
    key = ("tree", target)
    if key in topo.cache:
        return topo.cache[key]
    dist = [math.inf] * topo.n_nodes
    dist[target] = 0.0
    heap = [(0.0, target)]
    done = [False] * topo.n_nodes
    while heap:
        d, v = heapq.heappop(heap)
        if done[v]:
            continue
        done[v] = True
        for lid in topo.in_links[v]:
            link = topo.links[lid]
            nd = d + link.weight
            if nd < dist[link.src]:
                dist[link.src] = nd
                heapq.heappush(heap, (nd, link.src))
    unreachable = [topo.names[v] for v in range(topo.n_nodes) if math.isinf(dist[v])]
    if unreachable:
        raise PathError(f"nodes cannot reach {topo.names[target]}: {unreachable}")
    parent = [None] * topo.n_nodes
    for v in range(topo.n_nodes):
        if v == target:
            continue
        for lid in topo.out_links[v]:  # ascending ids
            link = topo.links[lid]
            if abs(dist[v] - link.weight - dist[link.dst]) <= EPS * max(1.0, dist[v]):
                parent[v] = lid
                break
    tree = ShortestPathTree(target, tuple(dist), tuple(parent))
    topo.cache[key] = tree
    return tree


def sidetrack_cost(topo: Topology, tree: ShortestPathTree, link_id: int) -> float:
    if tree.is_tree_arc(link_id, topo):
        raise PathError(f"link {link_id} is a tree arc, not a sidetrack")
    link = topo.links[link_id]
    return max(0.0, tree.dist[link.dst] - tree.dist[link.src] + link.weight)


def build_path(topo: Topology, tree: ShortestPathTree, src: int, sidetracks) -> Path | None:
    """Walk from ``src``: take the sidetrack leaving the current node if any, else the tree arc.

    Returns None when the set is not well-formed (two sidetracks from one node,
    a revisited node, or a sidetrack never reached).
    """
    by_tail = {}
    for lid in sidetracks:
        tail = topo.links[lid].src
        if tail in by_tail:
            return None
        by_tail[tail] = lid
    return _walk(topo, tree, (src,), (), by_tail, 0)


def _walk(topo, tree, nodes, links, by_tail, used):
    seen = set(nodes)
    nodes, links = list(nodes), list(links)
    v = nodes[-1]
    while v != tree.target:
        lid = by_tail.get(v)
        if lid is not None:
            used += 1
        else:
            lid = tree.parent_link[v]
        v = topo.links[lid].dst
        if v in seen:
            return None
        seen.add(v)
        nodes.append(v)
        links.append(lid)
    if used != len(by_tail):
        return None
    return Path(tuple(nodes), tuple(links), math.fsum(topo.links[l].weight for l in links))


def stretch_budget(theta: float, shortest: float) -> float:
    return math.inf if math.isinf(theta) else theta * shortest


def enumerate_paths(topo: Topology, src: int, dst: int, theta: float = 0.25,
                    max_paths: int = DEFAULT_MAX_PATHS) -> list[Path]:
    """Loop-free src->dst paths with total sidetrack cost <= theta * d(src), shortest first.

    At most ``max_paths`` are returned; paths tied in length are ordered by node
    sequence before the cut.  Results are memoised on the topology.
    """
    if src == dst:
        raise PathError("source equals destination")
    if theta < 0:
        raise PathError("theta must be >= 0")
    if max_paths < 1:
        raise PathError("max_paths must be positive")
    key = ("paths", src, dst, float(theta), max_paths)
    cached = topo.cache.get(key)
    if cached is None:
        cached = topo.cache[key] = tuple(_enumerate(topo, src, dst, theta, max_paths))
    return list(cached)


def _enumerate(topo, src, dst, theta, max_paths):
    tree = shortest_tree(topo, dst)
    budget = stretch_budget(theta, tree.dist[src]) + EPS
    cost = {}
    for link in topo.links:
        if tree.parent_link[link.src] != link.id:
            cost[link.id] = sidetrack_cost(topo, tree, link.id)

    # A state is a loop-free prefix that ends right after its last sidetrack.
    # Its path is the prefix completed along the tree; new sidetracks may only
    # leave the tree part, so each sidetrack set is generated once, in path
    # order.  Prefixes whose tree completion loops are expanded but not emitted.
    heap = [(0.0, (src,), ())]
    seen = set()
    out = []
    while heap:
        c, nodes, links = heapq.heappop(heap)
        # keep draining the current length tier so ties can be ordered before the cut
        if len(out) >= max_paths and c > out[-1][0] + EPS:
            break
        sigma = tuple(sorted(l for l in links if l in cost))
        if sigma in seen:
            continue
        seen.add(sigma)
        on_path = set(nodes)
        walk_nodes, walk_links = list(nodes), list(links)
        v = nodes[-1]
        looped = False
        while True:
            if v != dst:
                for lid in topo.out_links[v]:
                    if lid not in cost or c + cost[lid] > budget:
                        continue
                    head = topo.links[lid].dst
                    if head not in on_path:
                        heapq.heappush(heap, (c + cost[lid], tuple(walk_nodes) + (head,),
                                              tuple(walk_links) + (lid,)))
            if v == dst:
                break
            lid = tree.parent_link[v]
            v = topo.links[lid].dst
            if v in on_path:
                looped = True
                break
            on_path.add(v)
            walk_nodes.append(v)
            walk_links.append(lid)
        if not looped:
            length = math.fsum(topo.links[l].weight for l in walk_links)
            out.append((c, Path(tuple(walk_nodes), tuple(walk_links), length)))
    out.sort(key=lambda cp: (round(cp[1].length, 9), cp[1].nodes))
    return [p for _, p in out[:max_paths]]


def sidetrack_set(topo: Topology, tree: ShortestPathTree, path: Path) -> tuple[int, ...]:
    return tuple(sorted(l for l in path.links if not tree.is_tree_arc(l, topo)))
