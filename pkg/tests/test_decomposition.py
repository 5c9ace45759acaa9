from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from genassoc.combinatorics import Family, Orient, catalan, pinwheel
from genassoc.decomposition import (
    ClassId,
    IsomorphismFailure,
    boundary_edges,
    central_triangle_partition,
    class_iso_witness,
    classes,
    intersection_witness,
    is_central,
    projection_graph,
    type_a_hierarchy,
    type_b_emin,
)
from genassoc.flipgraph import cached_graph


def test_type_b_class_sizes():
    for n, k, size in [(3, 4, 5), (4, 5, 14)]:
        cover = classes(cached_graph("B", n))
        assert cover.k == k
        assert {len(m) for m in cover.members} == {size}
        assert sorted(v for m in cover.members for v in m) == list(range(cached_graph("B", n).order))


def test_type_d_classes_and_pinwheel():
    g = cached_graph("D", 3)
    cover = classes(g)
    assert cover.k == 6 and {len(m) for m in cover.members} == {5}
    p = g.index_of(pinwheel(3).mask())
    holding = [cover.ids[i] for i, m in enumerate(cover.members) if p in m]
    assert len(holding) == 3 and all(c.orient is Orient.CW for c in holding)


def test_boundary_examples_b3():
    g = cached_graph("B", 3)
    cover = classes(g)
    weights = sorted(boundary_edges(g, cover, i, j).weight for i in range(4) for j in range(i + 1, 4))
    # four pairs at distance 1, two at distance 2
    assert weights == [1, 1, 2, 2, 2, 2]


def test_type_d_opposite_orientations_overlap():
    g = cached_graph("D", 3)
    cover = classes(g)
    cw = cover.ids.index(ClassId.oriented_pair(0, Orient.CW))
    ccw = cover.ids.index(ClassId.oriented_pair(0, Orient.CCW))
    b = boundary_edges(g, cover, cw, ccw)
    assert len(b.edges) == 0 and len(b.overlap) == 2


@pytest.mark.parametrize("n", range(2, 8))
def test_type_b_projection(n):
    g = cached_graph("B", n)
    pg = projection_graph(g, classes(g))
    assert pg.gamma == 2 and pg.e_min == type_b_emin(n)
    assert pg.is_connected()
    assert len(pg.weights) == (n + 1) * n // 2


def test_projection_examples():
    pg = projection_graph(cached_graph("B", 5), classes(cached_graph("B", 5)))
    assert pg.e_min == 4
    g = cached_graph("D", 4)
    assert projection_graph(g, classes(g)).e_min == 2


@pytest.mark.parametrize("family,n", [("B", 3), ("B", 5), ("D", 3), ("D", 5)])
def test_class_witnesses(family, n):
    g = cached_graph(family, n)
    cover = classes(g)
    for cid in cover.ids:
        w = class_iso_witness(g, cid, cover)
        assert w.target_n == n - 1
        assert sorted(w.image) == list(range(cached_graph("A", n - 1).order))


def test_intersection_witness_d3():
    g = cached_graph("D", 3)
    w = intersection_witness(g, 0)
    assert len(w.members) == 2 and w.target_n == 1


def test_tampered_graph_breaks_witness():
    from genassoc.flipgraph import FlipGraph

    g = cached_graph("B", 3)
    adj = [list(a) for a in g.adjacency]
    cover = classes(g)
    members = cover.members[0]
    u, v = next((u, v) for u in members for v in adj[u] if v in members)
    adj[u].remove(v)
    adj[v].remove(u)
    bad = FlipGraph(g.family, g.n, g.masks, adj)
    with pytest.raises(IsomorphismFailure):
        class_iso_witness(bad, cover.ids[0], classes(bad))


def test_pentagon_partition():
    part = central_triangle_partition(2, 2)
    assert len(part.classes) == 5 and all(len(c.members) == 1 for c in part.classes)
    assert len(central_triangle_partition(4, 1).classes) == 1


def test_heptagon_partition_sizes():
    part = central_triangle_partition(4, 2)
    assert sum(len(c.members) for c in part.classes) == 42
    assert all(len(c.members) == c.predicted_size for c in part.classes)


@given(st.integers(min_value=1, max_value=6), st.data())
def test_partition_is_exact(n, data):
    k = data.draw(st.integers(min_value=1, max_value=n))
    part = central_triangle_partition(n, k)
    seen = sorted(v for c in part.classes for v in c.members)
    assert seen == list(range(catalan(n + 1)))
    assert all(len(c.members) == c.predicted_size for c in part.classes)


@given(st.integers(min_value=4, max_value=10), st.data())
def test_each_triangulation_has_one_central_triangle(m, data):
    # with the diameter tie-break, every triangulation of a regular m-gon has
    # exactly one central triangle
    g = cached_graph("A", m - 3)
    t = g.triangulation(data.draw(st.integers(0, g.order - 1)))
    edges = {(e.a, e.b) for e in t.elements} | {(i, i + 1) for i in range(m - 1)} | {(0, m - 1)}
    tris = [(p, q, r) for p in range(m) for q in range(p + 1, m) for r in range(q + 1, m)
            if {(p, q), (q, r), (p, r)} <= edges]
    assert sum(is_central(p, q, r, m) for p, q, r in tris) == 1


def test_type_a_hierarchy_covers_vertices():
    g = cached_graph("A", 4)
    h = type_a_hierarchy(g)
    assert sorted(h.members) == list(range(g.order))
    for child in h.children:
        assert set(child.members) <= set(h.members)
    assert sorted(v for c in h.children for v in c.members) == sorted(h.members)


def test_classes_reject_type_a():
    with pytest.raises(ValueError):
        classes(cached_graph(Family.A, 3))
