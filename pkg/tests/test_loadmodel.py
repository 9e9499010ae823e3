import pytest
from hypothesis import given, strategies as st

from fewpaths.kpaths import Path, PathError
from fewpaths.loadmodel import LoadLedger, ecmp_loads, plan_loads, report
from fewpaths.placement import MultipathPlan, plan_fixed_k
from fewpaths.topology import Link, Topology, make_irregular, make_xgft
from fewpaths.traffic import TrafficMatrix, random_matrix, uniform_matrix

SIXNODE_ECMP = {("S", "A"): 0.5, ("S", "B"): 0.5, ("A", "C"): 0.5, ("B", "C"): 0.25,
             ("B", "D"): 0.25, ("C", "T"): 0.75, ("D", "T"): 0.25}


def level(name):
    return int(name[1])


def test_sixnode_ecmp(sixnode, sixnode_tm):
    loads = ecmp_loads(sixnode, sixnode_tm).as_dict()
    for key, value in loads.items():
        assert value == pytest.approx(SIXNODE_ECMP.get(key, 0.0), abs=1e-12)
    assert report(ecmp_loads(sixnode, sixnode_tm)).max_utilization == pytest.approx(0.75)


def test_zero_matrix(sixnode):
    ledger = ecmp_loads(sixnode, TrafficMatrix({}))
    assert set(ledger.load) == {0.0}
    rep = report(ledger)
    assert rep.sorted_utilizations == [0.0] * len(sixnode.links)
    assert rep.max_utilization == 0.0


def test_xgft_uniform_ecmp_is_flat():
    t = make_xgft(2, [3, 6], [3, 3])
    ledger = ecmp_loads(t, uniform_matrix(t))
    groups = {}
    for link in t.links:
        key = (level(t.names[link.src]), level(t.names[link.dst]))
        groups.setdefault(key, set()).add(round(ledger.load[link.id], 9))
    # every class of link (leaf-up, core-up, core-down, leaf-down) carries one value
    assert all(len(v) == 1 for v in groups.values())


def test_plan_loads_sixnode(sixnode, sixnode_tm):
    idx = sixnode.index
    plan = MultipathPlan({(idx("S"), idx("T")): (
        Path.from_nodes(sixnode, [idx(n) for n in "SACT"]),
        Path.from_nodes(sixnode, [idx(n) for n in "SBDT"]))})
    ledger = plan_loads(sixnode, sixnode_tm, plan)
    used = {k: v for k, v in ledger.as_dict().items() if v}
    assert used == {("S", "A"): 0.5, ("A", "C"): 0.5, ("C", "T"): 0.5,
                    ("S", "B"): 0.5, ("B", "D"): 0.5, ("D", "T"): 0.5}
    assert report(ledger).max_utilization == 0.5


def test_single_path_plan(sixnode, sixnode_tm):
    idx = sixnode.index
    p = Path.from_nodes(sixnode, [idx(n) for n in "SBCT"])
    ledger = plan_loads(sixnode, sixnode_tm.scaled(3.0), MultipathPlan({(idx("S"), idx("T")): (p,)}))
    assert [ledger.load[l] for l in p.links] == [3.0, 3.0, 3.0]
    assert sum(ledger.load) == 9.0


def test_missing_flow(sixnode, sixnode_tm):
    with pytest.raises(PathError):
        plan_loads(sixnode, sixnode_tm, MultipathPlan({}))


def test_plan_loads_matches_planner_ledger():
    t = make_irregular(14, 3.0, 2)
    m = random_matrix(t, 2)
    plan = plan_fixed_k(t, m, 3, 0.25, seed=2)
    assert plan_loads(t, m, plan).close_to(plan.ledger)


def test_report_csv_and_curve(sixnode, sixnode_tm):
    rep = report(ecmp_loads(sixnode, sixnode_tm))
    lines = rep.to_csv().splitlines()
    assert lines[0] == "rank,link_src,link_dst,load,capacity,utilization"
    assert lines[-1].startswith("18,C,T,0.75,")
    assert rep.to_curve().splitlines()[-1] == "18 0.75"
    assert sorted(rep.sorted_utilizations) == rep.sorted_utilizations
    assert sorted(rep.sorted_utilizations) == sorted(ecmp_loads(sixnode, sixnode_tm).utilizations())


def _with_capacity(topo, factor):
    links = tuple(Link(l.id, l.src, l.dst, l.weight, l.capacity * factor) for l in topo.links)
    return Topology(topo.names, links, topo.endpoints)


@given(st.integers(5, 14), st.integers(0, 10**6))
def test_ecmp_conservation(n, seed):
    t = make_irregular(n, 2.8, seed)
    m = random_matrix(t, seed)
    s, d = m.flows[seed % len(m)]
    single = TrafficMatrix({(s, d): m[(s, d)]})
    ledger = ecmp_loads(t, single)
    for v in range(t.n_nodes):
        inflow = sum(ledger.load[l] for l in t.in_links[v])
        outflow = sum(ledger.load[l] for l in t.out_links[v])
        if v == s:
            assert outflow - inflow == pytest.approx(m[(s, d)], abs=1e-9)
        elif v == d:
            assert inflow == pytest.approx(m[(s, d)], abs=1e-9)
        else:
            assert inflow == pytest.approx(outflow, abs=1e-9)


@given(st.integers(5, 14), st.integers(0, 10**6), st.floats(0.1, 50))
def test_ecmp_capacity_invariant(n, seed, factor):
    t = make_irregular(n, 2.8, seed)
    m = random_matrix(t, seed)
    assert ecmp_loads(t, m).close_to(ecmp_loads(_with_capacity(t, factor), m))


@given(st.integers(5, 12), st.integers(0, 10**6))
def test_plan_loads_linear(n, seed):
    t = make_irregular(n, 2.8, seed)
    m1, m2 = random_matrix(t, seed), random_matrix(t, seed + 1)
    plan = plan_fixed_k(t, m1, 2, 0.25, seed=seed)
    total = plan_loads(t, m1 + m2, plan)
    parts = [a + b for a, b in zip(plan_loads(t, m1, plan).load, plan_loads(t, m2, plan).load)]
    assert total.close_to(LoadLedger(t, parts))
