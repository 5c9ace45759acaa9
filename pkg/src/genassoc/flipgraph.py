"""Flip moves and flip graphs of the type A, B and D associahedra."""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass
from functools import lru_cache

from .combinatorics import (
    DEFAULT_ENUMERATION_CAP,
    CanonicalTriangulation,
    Family,
    Universe,
    bits,
    check_size,
    count_vertices,
    enumerate_masks,
    universe,
)


class UniquenessViolation(RuntimeError):
    """A flip had zero or several completions; the combinatorial model is broken."""


@dataclass(frozen=True)
class FlipOrbit:
    """The element(s) removed by one flip: a single diagonal, a central
    diagonal, or a centrally symmetric pair."""

    family: Family
    mask: int

    def elements(self, uni: Universe):
        return uni.elements_of(self.mask)


def orbit_masks(uni: Universe, mask: int) -> list[int]:
    """Symmetry orbits contained in the triangulation ``mask``, ascending."""
    seen = 0
    out = []
    for i in bits(mask):
        if seen >> i & 1:
            continue
        om = uni.orbit_of[i]
        seen |= om
        out.append(om)
    return out


def flippable_orbits(t: CanonicalTriangulation) -> list[FlipOrbit]:
    uni = universe(t.family, t.n)
    return [FlipOrbit(t.family, om) for om in orbit_masks(uni, t.mask())]


def flip_mask(uni: Universe, mask: int, orbit: int) -> tuple[int, int]:
    """Flip ``orbit`` out of the triangulation ``mask``.

    Returns ``(new_mask, new_orbit)``.  The completing orbit is searched among
    all orbits compatible with the remaining elements; any completion must
    cross the removed orbit, otherwise ``mask`` would not have been maximal.
    """
    rest = mask & ~orbit
    cross = uni.cross
    candidates = 0
    for i in bits(orbit):
        candidates |= cross[i]
    blocked = mask
    for i in bits(rest):
        blocked |= cross[i]
    candidates &= ~blocked
    found = 0
    seen = 0
    for i in bits(candidates):
        if seen >> i & 1:
            continue
        om = uni.orbit_of[i]
        seen |= om
        ok = True
        for j in bits(om):
            if cross[j] & (rest | om):
                ok = False
                break
        if not ok:
            continue
        if found:
            raise UniquenessViolation(
                f"several completions after removing {uni.encode_mask(orbit)} "
                f"from {uni.encode_mask(mask)}"
            )
        found = om
    if not found:
        raise UniquenessViolation(
            f"no completion after removing {uni.encode_mask(orbit)} from {uni.encode_mask(mask)}"
        )
    return rest | found, found


def flip(t: CanonicalTriangulation, o: FlipOrbit) -> CanonicalTriangulation:
    uni = universe(t.family, t.n)
    mask = t.mask()
    if o.mask & mask != o.mask:
        raise ValueError("orbit is not contained in the triangulation")
    new, _ = flip_mask(uni, mask, o.mask)
    return CanonicalTriangulation.from_mask(uni, new)


class Graph:
    """A finite simple undirected graph given by sorted neighbour lists."""

    def __init__(self, adjacency: list[list[int]]):
        self.adjacency = adjacency

    @property
    def order(self) -> int:
        return len(self.adjacency)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def edges(self):
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if u < v:
                    yield u, v

    def induced(self, members) -> tuple["Graph", list[int]]:
        """Induced subgraph on ``members`` (relabelled ``0..k-1`` in sorted order)."""
        members = sorted(members)
        local = {v: i for i, v in enumerate(members)}
        adj = [sorted(local[w] for w in self.adjacency[v] if w in local) for v in members]
        return Graph(adj), members


class FlipGraph(Graph):
    """Flip graph with vertices in canonical (sorted-encoding) order."""

    def __init__(self, family: Family, n: int, masks: list[int], adjacency: list[list[int]]):
        super().__init__(adjacency)
        self.family = family
        self.n = n
        self.masks = masks
        self._encodings: list[str] | None = None
        self._index: dict | None = None

    def __repr__(self):
        return f"FlipGraph({self.family.value}, n={self.n}, |V|={self.order})"

    @property
    def universe(self) -> Universe:
        return universe(self.family, self.n)

    @property
    def vertices(self) -> list[str]:
        if self._encodings is None:
            uni = self.universe
            self._encodings = [uni.encode_mask(m) for m in self.masks]
        return self._encodings

    def index_of(self, mask: int) -> int:
        if self._index is None:
            self._index = {m: i for i, m in enumerate(self.masks)}
        return self._index[mask]

    def triangulation(self, i: int) -> CanonicalTriangulation:
        return CanonicalTriangulation.from_mask(self.universe, self.masks[i])


def _neighbour_masks(uni: Universe, masks: list[int]) -> list[list[int]]:
    out = []
    for mk in masks:
        out.append([flip_mask(uni, mk, om)[0] for om in orbit_masks(uni, mk)])
    return out


def _chunked_neighbours(args):
    family, n, masks = args
    return _neighbour_masks(universe(family, n), masks)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("GENASSOC_THREADS", "1")))
    except ValueError:
        return 1


def build_graph(
    family: Family | str,
    n: int,
    cap: int | None = DEFAULT_ENUMERATION_CAP,
    workers: int | None = None,
) -> FlipGraph:
    family = check_size(family, n)
    uni = universe(family, n)
    masks = enumerate_masks(family, n, cap)
    workers = default_workers() if workers is None else workers
    if workers > 1 and len(masks) > 2000:
        from concurrent.futures import ProcessPoolExecutor

        size = -(-len(masks) // workers)
        chunks = [(family, n, masks[i : i + size]) for i in range(0, len(masks), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunked_neighbours, chunks))
        nbr_masks = [row for part in parts for row in part]
    else:
        nbr_masks = _neighbour_masks(uni, masks)
    index = {m: i for i, m in enumerate(masks)}
    adjacency = [sorted(index[x] for x in row) for row in nbr_masks]
    g = FlipGraph(family, n, masks, adjacency)
    g._index = index
    return g


@lru_cache(maxsize=32)
def cached_graph(family: Family | str, n: int) -> FlipGraph:
    """Build-once graphs for analysis code that revisits the same sizes."""
    return build_graph(Family.parse(family), n, cap=None)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


def is_connected(adjacency: list[list[int]]) -> bool:
    if not adjacency:
        return True
    seen = [False] * len(adjacency)
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                queue.append(v)
    return count == len(adjacency)


def validate_graph(g: FlipGraph) -> list[Check]:
    """Structural checks; failures are reported, never raised."""
    checks = []
    expected = count_vertices(g.family, g.n)
    checks.append(Check("vertex-count", g.order == expected, f"|V|={g.order} expected={expected}"))
    degrees = {len(a) for a in g.adjacency}
    checks.append(Check("regular", degrees == {g.n}, f"degrees={sorted(degrees)} n={g.n}"))
    total = sum(len(a) for a in g.adjacency)
    checks.append(
        Check("handshake", total == g.n * g.order, f"sum(deg)={total} n|V|={g.n * g.order}")
    )
    symmetric = True
    simple = True
    for u, nbrs in enumerate(g.adjacency):
        if len(set(nbrs)) != len(nbrs) or u in nbrs:
            simple = False
        for v in nbrs:
            if u not in g.adjacency[v]:
                symmetric = False
    checks.append(Check("symmetric", symmetric))
    checks.append(Check("simple", simple))
    checks.append(Check("connected", is_connected(g.adjacency)))
    return checks


def flip_closure(family: Family | str, n: int, start: int) -> set[int]:
    """All triangulation masks reachable from ``start`` by flips (BFS)."""
    uni = universe(family, n)
    seen = {start}
    queue = deque([start])
    while queue:
        mk = queue.popleft()
        for om in orbit_masks(uni, mk):
            new, _ = flip_mask(uni, mk, om)
            if new not in seen:
                seen.add(new)
                queue.append(new)
    return seen


def graph_from_edges(order: int, edges) -> Graph:
    adjacency = [set() for _ in range(order)]
    for u, v in edges:
        if u == v:
            continue
        adjacency[u].add(v)
        adjacency[v].add(u)
    return Graph([sorted(a) for a in adjacency])


def cycle_graph(m: int) -> Graph:
    return graph_from_edges(m, [(i, (i + 1) % m) for i in range(m)])


def complete_graph(m: int) -> Graph:
    return graph_from_edges(m, [(i, j) for i in range(m) for j in range(i + 1, m)])


def cartesian_product(g: Graph, h: Graph) -> Graph:
    """Cartesian product; vertex ``(u, v)`` is numbered ``u * |H| + v``."""
    k = h.order
    edges = []
    for u in range(g.order):
        for v1, v2 in h.edges():
            edges.append((u * k + v1, u * k + v2))
    for u1, u2 in g.edges():
        for v in range(k):
            edges.append((u1 * k + v, u2 * k + v))
    return graph_from_edges(g.order * k, edges)
