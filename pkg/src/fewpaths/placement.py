"""Choosing a few paths per flow so that an even split keeps the worst link cool.

``plan_fixed_k`` is the greedy planner; ``plan_adaptive_k`` grows each flow's
path set one round at a time and keeps an extra path only while it does not
raise the flow's worst link; ``finetune`` swaps paths off the hottest links.
``oracle_best_plan`` is an exhaustive search for tiny instances.
"""
from __future__ import annotations

import json
import math
import random
from collections import Counter
from dataclasses import dataclass, field

from .kpaths import EPS, Path, PathError, enumerate_paths
from .loadmodel import LoadLedger, plan_loads
from .topology import Topology
from .traffic import TrafficMatrix

DEFAULT_THETA = 0.25
DEFAULT_CANDIDATES = 100
TIE_TOL = 1e-12


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class CostFunction:
    """``max``: worst link utilization on the path; ``sum``: summed utilization;
    ``convex``: summed utilization raised to ``exponent``."""

    kind: str = "max"
    exponent: float = 2.0

    def __post_init__(self):
        if self.kind not in ("max", "sum", "convex"):
            raise PlanError(f"unknown cost function {self.kind!r}")
        if self.kind == "convex" and not self.exponent > 1:
            raise PlanError("convex cost needs exponent > 1")

    def __str__(self):
        return f"convex{self.exponent:g}" if self.kind == "convex" else self.kind


MAX_UTIL = CostFunction("max")


def path_cost(kind: CostFunction, ledger: LoadLedger, path: Path, increment: float) -> float:
    if not path.links:
        raise PlanError("empty path")
    load = ledger.load
    links = ledger.topo.links
    utils = ((load[e] + increment) / links[e].capacity for e in path.links)
    if kind.kind == "max":
        return max(utils)
    if kind.kind == "sum":
        return math.fsum(utils)
    return math.fsum(u ** kind.exponent for u in utils)


@dataclass
class MultipathPlan:
    paths: dict[tuple[int, int], tuple[Path, ...]]
    params: dict = field(default_factory=dict)
    ledger: LoadLedger | None = field(default=None, repr=False, compare=False)

    def max_utilization(self) -> float:
        return self.ledger.max_utilization()

    def to_json(self, topo: Topology) -> str:
        names = topo.names
        flows = []
        for (s, t), ps in sorted(self.paths.items()):
            flows.append({
                "src": names[s],
                "dst": names[t],
                "weight": 1.0 / len(ps),
                "paths": [[names[v] for v in p.nodes] for p in ps],
            })
        return json.dumps({"params": self.params, "flows": flows}, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str, topo: Topology) -> "MultipathPlan":
        try:
            doc = json.loads(text)
            paths = {}
            for rec in doc["flows"]:
                key = (topo.index(rec["src"]), topo.index(rec["dst"]))
                ps = tuple(Path.from_nodes(topo, [topo.index(n) for n in nodes]) for nodes in rec["paths"])
                if any(p.src != key[0] or p.dst != key[1] for p in ps):
                    raise PlanError(f"path does not join {rec['src']} to {rec['dst']}")
                paths[key] = ps
            return cls(paths, dict(doc.get("params", {})))
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise PlanError(f"malformed plan file: {exc}") from None


def candidates(topo: Topology, s: int, t: int, theta: float, cap: int = DEFAULT_CANDIDATES) -> list[Path]:
    try:
        ps = enumerate_paths(topo, s, t, theta, cap)
    except PathError as exc:
        raise PlanError(f"no candidate path {topo.names[s]}->{topo.names[t]}: {exc}") from None
    if not ps:
        raise PlanError(f"no candidate path {topo.names[s]}->{topo.names[t]}")
    return ps


def _pick(paths, ledger, increment, kind, rng):
    """Lowest cost, then shortest, then least link overlap with the other
    candidates of the flow, then a seeded coin."""
    costs = [path_cost(kind, ledger, p, increment) for p in paths]
    best = min(costs)
    tied = [p for p, c in zip(paths, costs) if c <= best + TIE_TOL * max(1.0, abs(best))]
    if len(tied) > 1:
        shortest = min(p.length for p in tied)
        tied = [p for p in tied if p.length <= shortest + EPS]
    if len(tied) > 1:
        use = Counter(e for p in paths for e in p.links)
        overlap = [sum(use[e] - 1 for e in p.links) for p in tied]
        least = min(overlap)
        tied = [p for p, o in zip(tied, overlap) if o == least]
    return tied[0] if len(tied) == 1 else rng.choice(tied)


def plan_fixed_k(topo: Topology, m: TrafficMatrix, k: int, theta: float = DEFAULT_THETA,
                 kind: CostFunction = MAX_UTIL, seed: int = 0,
                 max_candidates: int = DEFAULT_CANDIDATES) -> MultipathPlan:
    if k < 1:
        raise PlanError("k must be >= 1")
    rng = random.Random(seed)
    ledger = LoadLedger(topo)
    flows = m.flows
    rng.shuffle(flows)
    paths = {}
    for s, t in flows:
        pool = candidates(topo, s, t, theta, max_candidates)
        n = min(k, len(pool))
        inc = m[(s, t)] / n
        chosen = []
        for _ in range(n):
            p = _pick(pool, ledger, inc, kind, rng)
            pool.remove(p)
            chosen.append(p)
            ledger.add_path(p, inc)
        paths[(s, t)] = tuple(chosen)
    params = {"algorithm": "fixed_k", "k": k, "theta": _theta_str(theta), "cost": str(kind), "seed": seed}
    return MultipathPlan(dict(sorted(paths.items())), params, ledger)


def plan_adaptive_k(topo: Topology, m: TrafficMatrix, k_max: int, theta: float = DEFAULT_THETA,
                    kind: CostFunction = MAX_UTIL, seed: int = 0, strict: bool = False,
                    max_candidates: int = DEFAULT_CANDIDATES) -> MultipathPlan:
    """Round i offers every flow an i-th path, kept only if the flow's worst
    link utilization with the demand re-spread does not go up (or, with
    ``strict``, goes down)."""
    if k_max < 1:
        raise PlanError("k_max must be >= 1")
    rng = random.Random(seed)
    ledger = LoadLedger(topo)
    links = topo.links
    chosen = {f: [] for f in m.flows}
    rejected = 0
    for _ in range(k_max):
        order = m.flows
        rng.shuffle(order)
        for f in order:
            cur = chosen[f]
            n = len(cur)
            pool = [p for p in candidates(topo, *f, theta, max_candidates) if p not in cur]
            if not pool:
                continue
            a = m[f]
            p = _pick(pool, ledger, a / (n + 1), kind, rng)
            if n:
                old_use = Counter(e for q in cur for e in q.links)
                new_use = old_use + Counter(p.links)
                old_max = max(ledger.load[e] / links[e].capacity for e in old_use)
                new_max = max((ledger.load[e] - old_use[e] * a / n + new_use[e] * a / (n + 1)) / links[e].capacity
                              for e in new_use)
                tol = TIE_TOL * max(1.0, old_max)
                ok = new_max < old_max - tol if strict else new_max <= old_max + tol
                if not ok:
                    rejected += 1
                    continue
                for q in cur:
                    ledger.add_path(q, a / (n + 1) - a / n)
            ledger.add_path(p, a / (n + 1))
            cur.append(p)
    params = {"algorithm": "adaptive_k", "k": k_max, "theta": _theta_str(theta), "cost": str(kind),
              "seed": seed, "strict": strict, "rejected": rejected}
    return MultipathPlan({f: tuple(ps) for f, ps in sorted(chosen.items())}, params, ledger)


def finetune(topo: Topology, m: TrafficMatrix, plan: MultipathPlan, theta: float = DEFAULT_THETA,
             max_rounds: int = 100, seed: int = 0,
             max_candidates: int = DEFAULT_CANDIDATES) -> MultipathPlan:
    """Move planned paths off the hottest links.

    A path crossing a hot link is replaced by an unused candidate of the same
    flow that avoids every hot link, provided no link it newly loads reaches
    the round's maximum.  Rounds repeat until nothing changes.
    """
    if max_rounds < 1:
        raise PlanError("max_rounds must be >= 1")
    ledger = plan_loads(topo, m, plan)
    caps = [l.capacity for l in topo.links]
    paths = {f: list(ps) for f, ps in plan.paths.items()}
    rng = random.Random(seed)
    swaps = rounds = 0
    while rounds < max_rounds:
        rounds += 1
        utils = ledger.utilizations()
        top = max(utils, default=0.0)
        if top <= 0:
            break
        tol = TIE_TOL * max(1.0, top)
        hot = {e for e, u in enumerate(utils) if u >= top - tol}
        changed = False
        order = sorted(paths)
        rng.shuffle(order)
        for f in order:
            if f not in m.entries:
                continue
            cur = paths[f]
            delta = m[f] / len(cur)
            for i, p in enumerate(cur):
                if hot.isdisjoint(p.links):
                    continue
                for q in candidates(topo, *f, theta, max_candidates):
                    if q in cur or not hot.isdisjoint(q.links):
                        continue
                    added = set(q.links).difference(p.links)
                    if all((ledger.load[e] + delta) / caps[e] < top - tol for e in added):
                        ledger.add_path(p, -delta)
                        ledger.add_path(q, delta)
                        cur[i] = q
                        changed = True
                        swaps += 1
                        break
        if not changed:
            break
    params = dict(plan.params, finetuned=True, finetune_rounds=rounds, finetune_swaps=swaps)
    return MultipathPlan({f: tuple(ps) for f, ps in paths.items()}, params, ledger)


def oracle_best_plan(topo: Topology, m: TrafficMatrix, k: int, theta: float = DEFAULT_THETA,
                     limit: int = 2_000_000, max_candidates: int = 20) -> MultipathPlan:
    """Exhaustive search over every per-flow path subset of size <= k (even split)."""
    from itertools import combinations

    flows = m.flows
    options = []
    space = 1
    for f in flows:
        pool = candidates(topo, *f, theta, max_candidates + 1)
        if len(pool) > max_candidates:
            raise PlanError(f"oracle: more than {max_candidates} candidates for flow {f}")
        subsets = [c for r in range(1, min(k, len(pool)) + 1) for c in combinations(pool, r)]
        space *= len(subsets)
        if space > limit:
            raise PlanError(f"oracle: search space exceeds {limit} combinations")
        opts = []
        for sub in subsets:
            share = m[f] / len(sub)
            add = Counter()
            for p in sub:
                for e in p.links:
                    add[e] += share / topo.links[e].capacity
            opts.append((sub, tuple(add.items())))
        options.append(opts)

    util = [0.0] * len(topo.links)
    best = [math.inf, None]
    pick = [None] * len(flows)

    def dfs(i, cur_max):
        if cur_max >= best[0] - TIE_TOL:
            return
        if i == len(flows):
            best[0], best[1] = cur_max, list(pick)
            return
        for sub, add in options[i]:
            peak = cur_max
            for e, u in add:
                util[e] += u
                peak = max(peak, util[e])
            pick[i] = sub
            dfs(i + 1, peak)
            for e, u in add:
                util[e] -= u

    dfs(0, 0.0)
    if best[1] is None:
        # empty matrix
        return MultipathPlan({}, {"algorithm": "oracle", "k": k, "theta": _theta_str(theta)}, LoadLedger(topo))
    plan = MultipathPlan(dict(zip(flows, best[1])),
                         {"algorithm": "oracle", "k": k, "theta": _theta_str(theta)})
    plan.ledger = plan_loads(topo, m, plan)
    return plan


def _theta_str(theta: float):
    return "inf" if math.isinf(theta) else theta


def parse_theta(text) -> float:
    if isinstance(text, (int, float)):
        return float(text)
    t = str(text).strip().lower()
    if t in ("inf", "infinity", "∞"):
        return math.inf
    if t.endswith("%"):
        return float(t[:-1]) / 100
    return float(t)
