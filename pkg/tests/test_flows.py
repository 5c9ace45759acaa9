from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from genassoc.combinatorics import Family, catalan
from genassoc.decomposition import (
    ClassCover,
    ClassId,
    central_triangle_partition,
    classes,
    partition_hierarchy,
    type_a_hierarchy,
)
from genassoc.flipgraph import cached_graph, complete_graph, cycle_graph, graph_from_edges, is_connected
from genassoc.flows import (
    FlowAssignment,
    MSFProblem,
    balance,
    baseline_uniform_mcf,
    compose_flows,
    exchange_amounts,
    hierarchical_flow_typeB,
    merge_schedule,
    pipeline_flow_typeB,
    solve_msf_pairwise,
    source_flow,
    typeB_surplus,
    validate_flow,
    validate_msf,
)
from genassoc.spectra import brute_force_expansion

F = Fraction


def path_graph(m):
    return graph_from_edges(m, [(i, i + 1) for i in range(m - 1)])


def star_graph(m):
    return graph_from_edges(m, [(0, i) for i in range(1, m)])


def test_validate_flow_examples():
    g = path_graph(4)
    assert validate_flow(g, {}, 2, 2).ok
    assert validate_flow(g, {(0, 1): 1, (1, 2): 1, (2, 3): 1}, 0, 3).ok
    assert not validate_flow(g, {(0, 1): 1, (1, 2): 1}, 0, 3).ok
    both = FlowAssignment({(0, 1): F(1), (1, 0): F(1)})
    failed = {c.name for c in validate_flow(g, both, 0, 0).failed()}
    assert "antisymmetric" in failed
    assert not validate_flow(g, {(0, 2): 1}, 0, 2).ok


def test_validate_msf_examples():
    g = cycle_graph(5)
    every = frozenset(range(5))
    assert validate_msf(g, {}, MSFProblem(1, every, every, 1)).ok
    star = star_graph(5)
    p = MSFProblem(5, {0}, frozenset(range(5)), 1)
    assert validate_msf(star, {(0, i): 1 for i in range(1, 5)}, p).ok
    assert not validate_msf(star, {(0, i): 1 for i in range(1, 4)}, p).ok
    with pytest.raises(ValueError):
        MSFProblem(1, {0}, every, 2)


def test_baseline_examples():
    r = baseline_uniform_mcf(cycle_graph(6))
    assert r.phi_max == F(3, 4) and r.expansion_lower_bound == F(2, 3) and r.valid
    for m in (3, 4, 5, 6):
        r = baseline_uniform_mcf(complete_graph(m))
        assert r.phi_max == F(1, m)
        assert r.expansion_lower_bound <= brute_force_expansion(complete_graph(m)).exact
    assert baseline_uniform_mcf(cycle_graph(5)).expansion_lower_bound <= 1


@st.composite
def connected_graphs(draw):
    m = draw(st.integers(min_value=2, max_value=9))
    tree = [(i, draw(st.integers(0, i - 1))) for i in range(1, m)]
    extra = draw(st.lists(st.tuples(st.integers(0, m - 1), st.integers(0, m - 1)), max_size=10))
    return graph_from_edges(m, tree + extra)


@given(connected_graphs())
def test_baseline_validates_and_bounds_expansion(g):
    assert is_connected(g.adjacency)
    r = baseline_uniform_mcf(g)
    assert r.valid and r.validations["per-source"] == g.order
    assert r.expansion_lower_bound <= brute_force_expansion(g).exact


@given(connected_graphs(), st.data())
def test_source_flow_is_a_unit_flow_per_target(g, data):
    s = data.draw(st.integers(0, g.order - 1))
    t = data.draw(st.integers(0, g.order - 1))
    f = source_flow(g.adjacency, s, {t: 1})
    assert validate_flow(g, f, s, t).ok if s != t else not f


def test_exchange_amounts():
    assert exchange_amounts([2, 2, 2], [1, 3, 5]) == {}
    out = exchange_amounts([3, 0, 0, 0, 0], [1] * 5)
    assert out == {(0, j): F(3, 5) for j in range(1, 5)}


def test_pairwise_on_pentagon_singletons():
    # a single level of five singletons on the 5-cycle: the exchange amounts
    # follow the formula, but non-adjacent singletons have no boundary to use
    g = cached_graph("A", 2)
    part = central_triangle_partition(2, 2, g)
    hier = partition_hierarchy(g, part)
    assert len(hier.children) == 5
    src = frozenset(part.classes[0].members)
    p = MSFProblem(5, src, frozenset(range(5)), 1)
    sigma = [p.surplus(c.members[0]) for c in hier.children]
    assert set(exchange_amounts(sigma, [1] * 5).values()) == {F(5, 5)}
    with pytest.raises(ValueError, match="share no edge"):
        solve_msf_pairwise(g, hier, p)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_pairwise_on_type_a(n):
    g = cached_graph("A", n)
    hier = type_a_hierarchy(g)
    first = frozenset(hier.children[0].members)
    p = MSFProblem(F(g.order, len(first)), first, frozenset(range(g.order)), 1)
    assert validate_msf(g, solve_msf_pairwise(g, hier, p), p).ok


def test_pairwise_rejects_partial_classes():
    g = cached_graph("A", 3)
    hier = type_a_hierarchy(g)
    part = frozenset(list(hier.children[0].members)[:1])
    p = MSFProblem(g.order, part, frozenset(range(g.order)), 1)
    with pytest.raises(ValueError):
        solve_msf_pairwise(g, hier, p)


@given(st.lists(st.integers(-20, 20), min_size=14, max_size=14))
def test_balance_realises_any_supply(values):
    g = cached_graph("A", 3)
    hier = type_a_hierarchy(g)
    supply = {v: F(x) for v, x in enumerate(values)}
    mean = sum(supply.values()) / g.order
    flow = balance(g.adjacency, hier, supply)
    target = {v: x - mean for v, x in supply.items()}
    assert validate_msf(g, flow, MSFProblem.from_supply(target)).ok


def test_pipeline_b3():
    r = pipeline_flow_typeB(3)
    assert r.valid
    assert max(r.details["transmit_per_pair_edge"].values()) == 25
    assert r.expansion_lower_bound <= brute_force_expansion(cached_graph("B", 3)).exact
    assert r.details["shuffle_intra"] == r.details["rho"] * catalan(3) / 20
    assert r.phi_max <= r.details["emin_bound"] == 324 * r.details["rho"]


def test_compose_single_class_is_class_flow():
    g = cached_graph("A", 3)
    cover = ClassCover(Family.A, 3, [ClassId("central-triangle", ())], [tuple(range(g.order))])
    r = compose_flows(g, cover)
    assert r.valid
    assert r.phi_max == r.details["rho"] == baseline_uniform_mcf(g).phi_max


@pytest.mark.parametrize("family,n", [("B", 3), ("B", 4), ("D", 3), ("D", 4)])
@pytest.mark.parametrize("method", ["product", "pairwise"])
def test_compose_bounds(family, n, method):
    g = cached_graph(family, n)
    r = compose_flows(g, classes(g), method=method)
    d = r.details
    assert r.valid
    assert r.phi_max <= d["projection_bound"]
    assert r.phi_max <= d["emin_bound"]
    if family == "D":
        assert d["k"] == 2 * n


def test_merge_schedule_padded_blocks():
    assert merge_schedule(4) == [(1, (0,), (1,)), (1, (2,), (3,)), (2, (0, 1), (2, 3))]
    assert merge_schedule(5) == [
        (1, (0,), (1,)), (1, (2,), (3,)), (2, (0, 1), (2, 3)), (3, (0, 1, 2, 3), (4,)),
    ]
    assert merge_schedule(5, "naive") == [(1, (0, 1, 2, 3, 4), ())]
    with pytest.raises(ValueError):
        merge_schedule(4, "other")


@pytest.mark.parametrize("n", [3, 4, 5])
@pytest.mark.parametrize("variant", ["hierarchical", "naive"])
def test_hierarchical_validates(n, variant):
    r = hierarchical_flow_typeB(n, variant)
    assert r.valid and sum(r.validations.values()) > 0
    assert r.expansion_lower_bound <= 1


def test_hierarchical_three_classes_per_level():
    r = hierarchical_flow_typeB(3)
    assert len(r.levels) == 2 and r.phi_max == F(5, 4)


def test_surplus_formula():
    s = typeB_surplus(3)
    assert s == {1: F(25, 2), 2: F(25, 1), 3: F(25, 2)}
