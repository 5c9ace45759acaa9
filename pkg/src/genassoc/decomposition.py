"""Class covers of flip graphs, their projection graphs, and type-A sub-structure.

Type B graphs are covered by the classes of triangulations sharing a central
diagonal; type D graphs by the classes sharing an antipodal pair of central
chords of one orientation.  Every such class is a type-A flip graph, and the
isomorphism is produced explicitly so it can be checked edge by edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import floor, log

from .combinatorics import (
    Central,
    Diagonal,
    Family,
    Orient,
    bits,
    catalan,
    check_size,
    diagonal,
    universe,
)
from .flipgraph import FlipGraph, Graph, cached_graph, is_connected


class IsomorphismFailure(RuntimeError):
    """A witness map failed to preserve adjacency."""


@dataclass(frozen=True, order=True)
class ClassId:
    """Key of one class.

    ``kind`` is ``"central-diagonal"`` (key ``(a, b)``), ``"oriented-pair"``
    (key ``(rank, v)`` with rank 0 for clockwise, 1 for counterclockwise) or
    ``"central-triangle"`` (key: the chosen triangles, in choice order).
    """

    kind: str
    key: tuple

    @classmethod
    def central_diagonal(cls, a: int, b: int) -> "ClassId":
        return cls("central-diagonal", (min(a, b), max(a, b)))

    @classmethod
    def oriented_pair(cls, v: int, orient: Orient) -> "ClassId":
        return cls("oriented-pair", (0 if orient is Orient.CW else 1, v))

    @property
    def orient(self) -> Orient:
        return Orient.CW if self.key[0] == 0 else Orient.CCW

    def label(self) -> str:
        if self.kind == "central-diagonal":
            return "D{}-{}".format(*self.key)
        if self.kind == "oriented-pair":
            return ("cw" if self.key[0] == 0 else "ccw") + str(self.key[1])
        return "T" + "".join("({},{},{})".format(*t) for t in self.key)


@dataclass
class ClassCover:
    family: Family
    n: int
    ids: list[ClassId]
    members: list[tuple[int, ...]]

    @property
    def k(self) -> int:
        return len(self.ids)

    def __iter__(self):
        return iter(zip(self.ids, self.members))

    def member_sets(self) -> list[frozenset]:
        return [frozenset(m) for m in self.members]

    def home(self, order: int) -> list[int]:
        """Smallest class index containing each vertex."""
        out = [-1] * order
        for i, mem in enumerate(self.members):
            for v in mem:
                if out[v] < 0:
                    out[v] = i
        return out

    def covers(self, order: int) -> bool:
        return all(h >= 0 for h in self.home(order))


def _check_bd(g: FlipGraph) -> None:
    if getattr(g, "family", None) not in (Family.B, Family.D):
        raise ValueError("class covers are defined for type B and type D graphs only")


def classes(g: FlipGraph) -> ClassCover:
    """The canonical cover: classes keyed by central diagonals (type B) or by
    oriented antipodal pairs of central chords (type D)."""
    _check_bd(g)
    uni = g.universe
    n = g.n
    ids, keys = [], []
    if g.family is Family.B:
        for v in range(n + 1):
            ids.append(ClassId.central_diagonal(v, v + n + 1))
            keys.append(1 << uni.index[Diagonal(v, v + n + 1)])
    else:
        for orient in (Orient.CW, Orient.CCW):
            for v in range(n):
                ids.append(ClassId.oriented_pair(v, orient))
                keys.append(1 << uni.index[Central(v, orient)])
    members = [tuple(i for i, m in enumerate(g.masks) if m & key) for key in keys]
    return ClassCover(g.family, n, ids, members)


@dataclass
class Boundary:
    """Edges between two classes, with shared vertices kept apart.

    ``edges`` holds graph edges ``(u, v)`` with ``u`` only in ``C_i`` and ``v``
    only in ``C_j``.  ``pairs`` holds every ordered pair of ``C_i x C_j``
    counted by the projection weight (adjacent pairs and ``(u, u)``).
    """

    i: int
    j: int
    edges: list[tuple[int, int]]
    overlap: list[int]
    pairs: list[tuple[int, int]]

    @property
    def weight(self) -> int:
        return len(self.pairs)


def boundary_edges(g: Graph, cover: ClassCover, i: int, j: int) -> Boundary:
    if i == j:
        raise ValueError("boundary_edges needs two distinct classes")
    ci, cj = set(cover.members[i]), set(cover.members[j])
    edges, pairs = [], []
    for u in cover.members[i]:
        for v in g.adjacency[u]:
            if v in cj:
                pairs.append((u, v))
                if u not in cj and v not in ci:
                    edges.append((u, v))
        if u in cj:
            pairs.append((u, u))
    pairs.sort()
    overlap = sorted(ci & cj)
    return Boundary(i, j, edges, overlap, pairs)


def boundary_set(g: Graph, cover: ClassCover, i: int, j: int) -> list[int]:
    """Vertices of ``C_i`` appearing in some weighted pair with ``C_j``."""
    return sorted({u for u, _ in boundary_edges(g, cover, i, j).pairs})


def cyclic_distance(a: int, b: int, n: int) -> int:
    """Distance between the type-B central diagonals at ``a`` and ``b``."""
    j = abs(a - b) % (n + 1)
    return min(j, n + 1 - j)


def type_b_pair_edges(n: int, a: int, b: int) -> int:
    """Predicted edge count between the classes of central diagonals at a, b."""
    j = abs(a - b) % (n + 1)
    return catalan(j - 1) * catalan(n - j)


def type_b_emin(n: int) -> int:
    return catalan((n + 1) // 2 - 1) * catalan(-(-(n + 1) // 2) - 1)


@dataclass
class ProjectionGraph:
    cover: ClassCover
    weights: dict[tuple[int, int], int]
    e_min: int
    gamma: int
    distances: dict[tuple[int, int], int] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.cover.k

    def weight(self, i: int, j: int) -> int:
        return self.weights.get((min(i, j), max(i, j)), 0)

    def graph(self) -> Graph:
        adj = [[] for _ in range(self.k)]
        for (i, j), w in sorted(self.weights.items()):
            if w > 0:
                adj[i].append(j)
                adj[j].append(i)
        return Graph([sorted(a) for a in adj])

    def is_connected(self) -> bool:
        return is_connected(self.graph().adjacency)


def gamma(g: Graph, cover: ClassCover) -> int:
    """Max over classes and members of outside neighbours plus memberships."""
    count = [0] * g.order
    for mem in cover.members:
        for v in mem:
            count[v] += 1
    best = 0
    for mem in cover.members:
        inside = set(mem)
        for u in mem:
            out = sum(1 for v in g.adjacency[u] if v not in inside)
            best = max(best, out + count[u])
    return best


def projection_graph(g: Graph, cover: ClassCover) -> ProjectionGraph:
    weights = {}
    for i in range(cover.k):
        for j in range(i + 1, cover.k):
            w = boundary_edges(g, cover, i, j).weight
            if w:
                weights[(i, j)] = w
    e_min = min(weights.values()) if weights else 0
    pg = ProjectionGraph(cover, weights, e_min, gamma(g, cover))
    if cover.family is Family.B:
        for i, j in weights:
            pg.distances[(i, j)] = cyclic_distance(cover.ids[i].key[0], cover.ids[j].key[0], cover.n)
    return pg


# ---------------------------------------------------------------------------
# Isomorphism witnesses
# ---------------------------------------------------------------------------

@dataclass
class Witness:
    """Vertex bijection from a class onto a type-A flip graph."""

    class_id: ClassId
    members: list[int]
    image: list[int]
    target_n: int
    a_masks: list[int]

    def as_dict(self) -> dict[int, int]:
        return dict(zip(self.members, self.image))


def _in_arc(x: int, start: int, length: int, m: int) -> int | None:
    off = (x - start) % m
    return off if off <= length else None


def _b_to_a(uni, mask: int, v: int, n: int, a_uni) -> int:
    m = 2 * n + 2
    out = 0
    for i in bits(mask):
        e = uni.elements[i]
        pa, pb = _in_arc(e.a, v, n + 1, m), _in_arc(e.b, v, n + 1, m)
        if pa is None or pb is None:
            continue
        d = diagonal(pa, pb)
        if d == Diagonal(0, n + 1):
            continue
        out |= 1 << a_uni.index[d]
    return out


def _d_to_a(uni, mask: int, v: int, n: int, a_uni) -> int:
    """Map a member of Psi(cw r) to the (n+2)-gon 0..n plus the centre n+1."""
    m = 2 * n
    centre = n + 1
    out = 0
    for i in bits(mask):
        e = uni.elements[i]
        if isinstance(e, Central):
            off = (e.v - v) % m
            if e.orient is Orient.CW:
                if 0 < off < n:
                    out |= 1 << a_uni.index[Diagonal(off, centre)]
            elif off == 0:
                out |= 1 << a_uni.index[Diagonal(0, n)]
            continue
        pa, pb = _in_arc(e.a, v, n, m), _in_arc(e.b, v, n, m)
        if pa is None or pb is None:
            continue
        out |= 1 << a_uni.index[diagonal(pa, pb)]
    return out


def _mirror_mask(uni, mask: int) -> int:
    """Reflection ``x -> -x``, which swaps the two chord orientations."""
    m = uni.m
    out = 0
    for i in bits(mask):
        e = uni.elements[i]
        if isinstance(e, Central):
            img = Central((-e.v) % m, Orient.CCW if e.orient is Orient.CW else Orient.CW)
        else:
            img = diagonal((-e.a) % m, (-e.b) % m)
        out |= 1 << uni.index[img]
    return out


def _check_iso(g: Graph, members: list[int], image: list[int], target: Graph, cid) -> None:
    if len(set(image)) != len(image) or len(image) != target.order:
        raise IsomorphismFailure(f"{cid.label()}: map is not a bijection onto the target")
    pos = dict(zip(members, image))
    count = 0
    for u in members:
        for w in g.adjacency[u]:
            if w in pos:
                count += 1
                if pos[w] not in target.adjacency[pos[u]]:
                    raise IsomorphismFailure(f"{cid.label()}: edge {u}-{w} is not preserved")
    if count // 2 != target.edge_count:
        raise IsomorphismFailure(f"{cid.label()}: edge counts differ")


def class_iso_witness(g: FlipGraph, cid: ClassId, cover: ClassCover | None = None) -> Witness:
    """Explicit isomorphism from a class onto the type-A graph of size n-1."""
    _check_bd(g)
    cover = cover or classes(g)
    members = list(cover.members[cover.ids.index(cid)])
    n = g.n
    target = cached_graph(Family.A, n - 1)
    a_uni = target.universe
    uni = g.universe
    a_masks = []
    if cid.kind == "central-diagonal":
        v = cid.key[0]
        for u in members:
            a_masks.append(_b_to_a(uni, g.masks[u], v, n, a_uni))
    else:
        v = cid.key[1]
        for u in members:
            mk = g.masks[u]
            if cid.orient is Orient.CCW:
                mk = _mirror_mask(uni, mk)
                base = (-v - n) % (2 * n)
            else:
                base = v
            a_masks.append(_d_to_a(uni, mk, base, n, a_uni))
    try:
        image = [target.index_of(a) for a in a_masks]
    except KeyError as exc:
        raise IsomorphismFailure(f"{cid.label()}: image is not a triangulation") from exc
    _check_iso(g, members, image, target, cid)
    return Witness(cid, members, image, n - 1, a_masks)


def intersection_witness(g: FlipGraph, v: int, cover: ClassCover | None = None) -> Witness:
    """Psi(cw r) and Psi(ccw r) meet in a copy of the type-A graph of size n-2."""
    if g.family is not Family.D:
        raise ValueError("intersection witnesses are a type-D construction")
    cover = cover or classes(g)
    cw = ClassId.oriented_pair(v, Orient.CW)
    ccw = ClassId.oriented_pair(v, Orient.CCW)
    both = sorted(set(cover.members[cover.ids.index(cw)]) & set(cover.members[cover.ids.index(ccw)]))
    n = g.n
    target = cached_graph(Family.A, n - 2)
    a_uni = target.universe
    uni = g.universe
    m = 2 * n
    a_masks = []
    for u in both:
        out = 0
        for i in bits(g.masks[u]):
            e = uni.elements[i]
            if isinstance(e, Central):
                continue
            pa, pb = _in_arc(e.a, v, n, m), _in_arc(e.b, v, n, m)
            if pa is not None and pb is not None:
                out |= 1 << a_uni.index[diagonal(pa, pb)]
        a_masks.append(out)
    cid = ClassId("oriented-pair", (2, v))
    try:
        image = [target.index_of(a) for a in a_masks]
    except KeyError as exc:
        raise IsomorphismFailure(f"cap{v}: image is not a triangulation") from exc
    _check_iso(g, both, image, target, cid)
    return Witness(cid, both, image, n - 2, a_masks)


# ---------------------------------------------------------------------------
# Central-triangle partition of type A
# ---------------------------------------------------------------------------

def is_central(p: int, q: int, r: int, m: int) -> bool:
    """Positions ``p < q < r`` on an m-gon form a triangle holding the centre.

    When the centre lies on a diameter, the triangle whose third vertex lies
    between the diameter's endpoints gets it.
    """
    return 2 * (q - p) < m and 2 * (r - q) < m and 2 * (m - (r - p)) <= m


def _side_present(poly: tuple, i: int, j: int, mask: int, a_uni) -> bool:
    if j - i == 1 or (i == 0 and j == len(poly) - 1):
        return True
    return bool(mask >> a_uni.index[diagonal(poly[i], poly[j])] & 1)


def central_triangle(poly: tuple, mask: int, a_uni) -> tuple[int, int, int]:
    m = len(poly)
    for p in range(m):
        for q in range(p + 1, m):
            for r in range(q + 1, m):
                if is_central(p, q, r, m) and all(
                    _side_present(poly, x, y, mask, a_uni) for x, y in ((p, q), (q, r), (p, r))
                ):
                    return p, q, r
    raise RuntimeError(f"no central triangle in {poly}")


def _split(poly: tuple, tri: tuple) -> list[tuple]:
    p, q, r = tri
    parts = [poly[p : q + 1], poly[q : r + 1], poly[r:] + poly[: p + 1]]
    return [part for part in parts if len(part) >= 3]


@dataclass
class PartitionClass:
    class_id: ClassId
    members: tuple[int, ...]
    factors: tuple[tuple[int, ...], ...]

    @property
    def factor_sizes(self) -> tuple[int, ...]:
        """Type-A sizes of the Cartesian factors (``a_i`` on ``i+3`` vertices)."""
        return tuple(len(f) - 3 for f in self.factors)

    @property
    def predicted_size(self) -> int:
        out = 1
        for f in self.factors:
            out *= catalan(len(f) - 2)
        return out


@dataclass
class CentralTrianglePartition:
    n: int
    k: int
    classes: list[PartitionClass]

    def factor_bound(self) -> Fraction:
        depth = floor(log(self.k, 3) + 1e-12) if self.k > 1 else 0
        return Fraction(self.n, 2**depth)

    def cover(self) -> ClassCover:
        return ClassCover(
            Family.A, self.n, [c.class_id for c in self.classes], [c.members for c in self.classes]
        )


def _classify(mask: int, m: int, k: int, a_uni):
    factors = [tuple(range(m))]
    chosen = []
    while k > 1 and len(factors) < k and any(len(f) >= 4 for f in factors):
        nxt = []
        for f in sorted(factors):
            if len(f) < 4:
                nxt.append(f)
                continue
            tri = central_triangle(f, mask, a_uni)
            chosen.append(tuple(f[x] for x in tri))
            nxt.extend(_split(f, tri))
        factors = sorted(nxt)
    return tuple(chosen), tuple(factors)


def central_triangle_partition(n: int, k: int, g: FlipGraph | None = None) -> CentralTrianglePartition:
    """Hierarchical partition of the type-A graph into Cartesian products.

    Levels split every factor polygon with at least four vertices by its
    central triangle, in increasing order of smallest label, until a
    triangulation's class has at least ``k`` factors (degenerate two-sided
    pieces are dropped; triangles count as single-vertex factors).
    """
    check_size(Family.A, n)
    if not 1 <= k <= n:
        raise ValueError(f"fineness k must satisfy 1 <= k <= n, got {k}")
    g = g or cached_graph(Family.A, n)
    a_uni = g.universe
    m = n + 3
    groups: dict[tuple, list[int]] = {}
    factor_of = {}
    for i, mask in enumerate(g.masks):
        chosen, factors = _classify(mask, m, k, a_uni)
        groups.setdefault(chosen, []).append(i)
        factor_of[chosen] = factors
    out = [
        PartitionClass(ClassId("central-triangle", key), tuple(groups[key]), factor_of[key])
        for key in sorted(groups)
    ]
    return CentralTrianglePartition(n, k, out)


# ---------------------------------------------------------------------------
# Apex hierarchy used by the pairwise flow solver
# ---------------------------------------------------------------------------

@dataclass
class HierarchyNode:
    """A set of vertices and its split into mutually adjacent groups.

    A node's split fixes the apex of the triangle on the special side
    ``(poly[0], poly[-1])`` of its first factor polygon with four or more
    vertices.  Leaves are single vertices.
    """

    members: list[int]
    children: list["HierarchyNode"] = field(default_factory=list)
    label: tuple = ()


def apex_split(
    members: list[int], a_masks: dict[int, int], a_uni, factors: list[tuple]
) -> list[tuple[tuple, list[int], list[tuple]]]:
    """Split ``members`` by apex on the first splittable factor.

    Returns ``(label, group, remaining_factors)`` triples, or ``[]`` when no
    factor can split.
    """
    idx = next((i for i, f in enumerate(factors) if len(f) >= 4), None)
    if idx is None:
        return []
    poly = factors[idx]
    rest = factors[:idx] + factors[idx + 1 :]
    last = len(poly) - 1
    groups: dict[int, list[int]] = {}
    for u in members:
        mk = a_masks[u]
        for a in range(1, last):
            if _side_present(poly, 0, a, mk, a_uni) and _side_present(poly, a, last, mk, a_uni):
                groups.setdefault(a, []).append(u)
                break
        else:
            raise RuntimeError("triangulation has no triangle on the special side")
    out = []
    for a in sorted(groups):
        sub = [p for p in (poly[: a + 1], poly[a:]) if len(p) >= 4]
        out.append(((poly[0], poly[a], poly[last]), groups[a], rest + sub))
    return out


def apex_hierarchy(members, a_masks: dict[int, int], a_uni, factors) -> HierarchyNode:
    members = sorted(members)
    node = HierarchyNode(members)
    if len(members) <= 1:
        return node
    parts = apex_split(members, a_masks, a_uni, list(factors))
    if not parts:
        raise RuntimeError("unsplittable node with several members")
    if len(parts) == 1:
        # only one apex occurs: descend without creating a trivial level
        return apex_hierarchy(members, a_masks, a_uni, parts[0][2])
    for label, group, rest in parts:
        child = apex_hierarchy(group, a_masks, a_uni, rest)
        child.label = label
        node.children.append(child)
    return node


def witness_hierarchy(w: Witness) -> HierarchyNode:
    """Apex hierarchy of a class through its type-A witness."""
    a_uni = universe(Family.A, w.target_n)
    masks = dict(zip(w.members, w.a_masks))
    return apex_hierarchy(w.members, masks, a_uni, [tuple(range(w.target_n + 3))])


def type_a_hierarchy(g: FlipGraph) -> HierarchyNode:
    masks = dict(enumerate(g.masks))
    return apex_hierarchy(range(g.order), masks, g.universe, [tuple(range(g.n + 3))])


def partition_hierarchy(g: FlipGraph, part: CentralTrianglePartition) -> HierarchyNode:
    """Top level the central-triangle classes, then apex splits inside each."""
    masks = dict(enumerate(g.masks))
    root = HierarchyNode(list(range(g.order)))
    for c in part.classes:
        factors = [f for f in c.factors if len(f) >= 4]
        child = apex_hierarchy(c.members, masks, g.universe, factors)
        child.label = c.class_id.key
        root.children.append(child)
    if len(root.children) == 1:
        return root.children[0]
    return root


@lru_cache(maxsize=64)
def cached_cover(family: Family, n: int) -> ClassCover:
    return classes(cached_graph(family, n))
