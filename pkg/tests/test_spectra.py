from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from genassoc.combinatorics import count_vertices
from genassoc.flipgraph import cached_graph, cartesian_product, complete_graph, cycle_graph, graph_from_edges
from genassoc.spectra import (
    ThresholdExceeded,
    boundary_size,
    brute_force_expansion,
    cheeger_consistent,
    exact_mixing_time,
    exhaustive_profile,
    lazy_transition,
    loglog_slope,
    lovasz_kannan_bound,
    mixing_bound_sinclair,
    pair_ratio_profile,
    product_expansion_bound,
    small_set_profile,
    spectral_gap,
    tv_distance,
    type_B_half_cut,
    typeB_loose_mixing_bounds,
)

F = Fraction


def dense_tau(g, eps):
    """Oracle: iterate the dense lazy matrix in floating point."""
    p = lazy_transition(g).dense()
    pi = np.full(g.order, 1 / g.order)
    mu = np.eye(g.order)
    t = 0
    while 0.5 * np.abs(mu - pi).sum(axis=1).max() >= float(eps):
        mu = mu @ p
        t += 1
    return t


def subset_expansion(g):
    """Oracle: exhaustive expansion by plain Python loops."""
    best = None
    for mask in range(1, 1 << g.order):
        s = [v for v in range(g.order) if mask >> v & 1]
        if 2 * len(s) > g.order:
            continue
        r = F(boundary_size(g, s), len(s))
        best = r if best is None or r < best else best
    return best


def test_lazy_operator():
    op = lazy_transition(complete_graph(2))
    assert [[op.entry(i, j) for j in range(2)] for i in range(2)] == [[F(1, 2)] * 2] * 2
    b3 = lazy_transition(cached_graph("B", 3))
    assert all(r == 1 for r in b3.row_sums())
    assert b3.entry(0, 0) == F(1, 2)
    u = cached_graph("B", 3).adjacency[0][0]
    assert b3.entry(0, u) == F(1, 6)
    assert set(b3.stationary()) == {F(1, 20)}


def test_lazy_operator_rejects_disconnected():
    with pytest.raises(ValueError):
        lazy_transition(graph_from_edges(4, [(0, 1), (2, 3)]))


def test_tv_examples():
    assert tv_distance([F(1, 2), F(1, 2)], [F(1, 2), F(1, 2)]) == 0
    assert tv_distance([1, 0], [0, 1]) == 1
    assert tv_distance([F(3, 4), F(1, 4)], [F(1, 4), F(3, 4)]) == F(1, 2)
    with pytest.raises(ValueError):
        tv_distance([F(1, 2), F(1, 4)], [F(1, 2), F(1, 2)])


def test_mixing_examples():
    assert exact_mixing_time(complete_graph(2)).tau == 1
    b2 = exact_mixing_time(cached_graph("B", 2))
    # frozen regression constant for the 6-cycle
    assert b2.tau == 4
    assert b2.tau == dense_tau(cached_graph("B", 2), F(1, 4))
    assert b2.curve == [F(5, 6), F(1, 2), F(3, 8), F(9, 32), F(27, 128)]


@pytest.mark.parametrize("family,n", [("B", 2), ("B", 3), ("A", 2), ("A", 3), ("D", 3), ("A", 4)])
def test_mixing_matches_dense_oracle_and_is_monotone(family, n):
    g = cached_graph(family, n)
    quarter = exact_mixing_time(g, F(1, 4))
    eighth = exact_mixing_time(g, F(1, 8))
    assert quarter.tau == dense_tau(g, F(1, 4))
    assert eighth.tau >= quarter.tau
    assert all(a >= b for a, b in zip(quarter.curve, quarter.curve[1:]))


def test_mixing_non_regular_graph():
    star = graph_from_edges(4, [(0, 1), (0, 2), (0, 3)])
    r = exact_mixing_time(star, F(1, 4))
    assert r.curve[0] == F(5, 6)


def test_mixing_threshold_and_selected_starts():
    g = cached_graph("B", 3)
    with pytest.raises(ThresholdExceeded):
        exact_mixing_time(g, F(1, 4), threshold=10)
    part = exact_mixing_time(g, F(1, 4), starts=[0], threshold=10)
    assert part.lower_bound and part.tau <= exact_mixing_time(g).tau


def test_spectral_gap_examples():
    assert spectral_gap(complete_graph(2)).gap == pytest.approx(1)
    assert spectral_gap(cycle_graph(4)).gap == pytest.approx(0.5)
    for m in (5, 6, 7):
        expected = 1 - (0.5 + 0.5 * math.cos(2 * math.pi / m))
        assert spectral_gap(cycle_graph(m)).gap == pytest.approx(expected, abs=1e-8)


@pytest.mark.parametrize("family,n", [("B", 3), ("A", 4), ("D", 3)])
def test_spectral_gap_matches_dense_eigensolver(family, n):
    g = cached_graph(family, n)
    gap = spectral_gap(g)
    eig = np.sort(np.linalg.eigvals(lazy_transition(g).dense()).real)
    assert gap.converged and 0 < gap.gap < 1
    assert gap.gap == pytest.approx(1 - eig[-2], abs=1e-7)


def test_brute_force_examples():
    assert brute_force_expansion(cycle_graph(5)).exact == 1
    c6 = brute_force_expansion(cycle_graph(6))
    assert c6.exact == F(2, 3)
    assert boundary_size(cycle_graph(6), c6.witness) == 2 and len(c6.witness) == 3
    for m in (3, 4, 5, 6):
        assert brute_force_expansion(complete_graph(m)).exact == m - m // 2
    with pytest.raises(ThresholdExceeded):
        brute_force_expansion(cached_graph("B", 4))


@given(st.integers(min_value=2, max_value=10), st.data())
def test_brute_force_matches_oracle(m, data):
    tree = [(i, data.draw(st.integers(0, i - 1))) for i in range(1, m)]
    extra = data.draw(st.lists(st.tuples(st.integers(0, m - 1), st.integers(0, m - 1)), max_size=12))
    g = graph_from_edges(m, tree + extra)
    est = brute_force_expansion(g, chunk_bits=3)
    assert est.exact == subset_expansion(g)
    assert F(boundary_size(g, est.witness), len(est.witness)) == est.exact
    assert est.consistent()


def test_half_cut_examples():
    c = type_B_half_cut(3)
    assert (len(c.subset), c.boundary, c.ratio) == (10, 6, F(3, 5))
    assert sorted(e for *_, e in c.metadata["pairs"]) == [1, 1, 2, 2]
    four = type_B_half_cut(4)
    assert four.boundary == four.metadata["predicted_boundary"]


def test_half_cut_recomputes_boundary_from_graph():
    g = cached_graph("B", 5)
    c = type_B_half_cut(5, g)
    assert c.boundary == boundary_size(g, c.subset)
    assert 2 * len(c.subset) <= g.order


def test_sinclair_examples():
    assert mixing_bound_sinclair(F(2, 3), 2, 6, F(1, 4)) == 229
    base = 72 * (math.log(6) + math.log(4))
    assert mixing_bound_sinclair(F(2, 3), 4, 6, F(1, 4)) == math.ceil(4 * base)
    with pytest.raises(ValueError):
        mixing_bound_sinclair(0, 2, 6)


def test_lovasz_kannan_constant_profile():
    order, d, h = 20, 3, F(1, 2)
    r = lovasz_kannan_bound([(F(1, 2), h)], d, order)
    assert r.value == pytest.approx(32 * d**2 / float(h) ** 2 * math.log(order / 2))
    with pytest.raises(ValueError):
        lovasz_kannan_bound([(F(1, 4), F(1, 2)), (F(1, 2), F(1))], d, order)
    with pytest.raises(ValueError):
        lovasz_kannan_bound([(F(1, 4), F(1, 2))], d, order)


@pytest.mark.parametrize("family,n", [("B", 2), ("B", 3), ("A", 3)])
def test_lovasz_kannan_with_exhaustive_profile(family, n):
    g = cached_graph(family, n)
    est = brute_force_expansion(g)
    profile = exhaustive_profile(est, g.order)
    lk = lovasz_kannan_bound(profile, n, g.order)
    assert lk.value >= exact_mixing_time(g).tau
    assert sum(s.contribution for s in lk.steps) == pytest.approx(lk.value)


def test_small_set_profile_a5():
    profile = small_set_profile(5)
    assert profile[-1][0] == F(1, 2)
    assert all(a[1] >= b[1] for a, b in zip(profile, profile[1:]))
    lk = lovasz_kannan_bound(profile, 5, count_vertices("A", 5))
    assert math.isfinite(lk.value) and all(s.source for s in lk.steps)


def test_product_bound_examples():
    assert product_expansion_bound([1, 1]) == F(1, 2)
    assert brute_force_expansion(cycle_graph(4)).exact == 1
    assert product_expansion_bound([F(2, 3)]) == F(1, 3)
    a2 = cached_graph("A", 2)
    h = brute_force_expansion(a2).exact
    assert product_expansion_bound([h, h]) == F(1, 2)
    prod = cartesian_product(a2, a2)
    assert brute_force_expansion(prod, cap=25).exact >= F(1, 2)
    with pytest.raises(ValueError):
        product_expansion_bound([])


def test_cheeger_consistency():
    for g, d in [(cycle_graph(6), 2), (cached_graph("B", 3), 3), (cached_graph("D", 3), 3)]:
        est = brute_force_expansion(g)
        assert cheeger_consistent(spectral_gap(g).gap, est.exact, d)
    assert not cheeger_consistent(0.9, F(1, 100), 3)


def test_pair_ratio_profile_counts_edges():
    rows = pair_ratio_profile(4)
    assert len(rows) == 10
    assert max(r for *_, r in rows) < 0.5657


def test_loose_mixing_parameterisations():
    out = typeB_loose_mixing_bounds(3, F(3, 5))
    assert out["degree-n"] == mixing_bound_sinclair(F(3, 5), 3, 20)
    assert out["printed"] == mixing_bound_sinclair(F(3, 5), 2, 6)


def test_loglog_slope():
    xs = [1, 2, 4, 8]
    assert loglog_slope(xs, [x**-0.5 for x in xs]) == pytest.approx(-0.5)
