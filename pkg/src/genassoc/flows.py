"""Exact single- and multicommodity flows on flip graphs.

Flows are kept in two shapes.  A *signed* flow is a dict ``{(u, v): x}`` with
``u < v`` where ``x > 0`` means ``x`` units travel ``u -> v``; it is what the
constructions accumulate, and netting inside it is only ever done within one
commodity.  A :class:`FlowAssignment` lists nonnegative values on directed
edges and is what the validators inspect.

Congestion follows the usual normalisation: the load of a directed edge is the
total flow over all commodities, divided by ``|V|``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from gmpy2 import mpq as Q

from .combinatorics import Family, catalan
from .decomposition import (
    ClassCover,
    HierarchyNode,
    ProjectionGraph,
    boundary_edges,
    class_iso_witness,
    classes,
    projection_graph,
    type_a_hierarchy,
)
from .flipgraph import Check, FlipGraph, Graph, cached_graph, is_connected

ZERO = Q(0)


def exact(x):
    """Convert internal rationals (and containers of them) to Fraction."""
    if isinstance(x, dict):
        return {k: exact(v) for k, v in x.items()}
    if isinstance(x, list):
        return [exact(v) for v in x]
    if type(x) is type(ZERO):
        return Fraction(int(x.numerator), int(x.denominator))
    return x


# ---------------------------------------------------------------------------
# Flow containers
# ---------------------------------------------------------------------------

def add_signed(flow: dict, u: int, v: int, x) -> None:
    """Add ``x`` units travelling ``u -> v`` to a signed flow."""
    if u < v:
        flow[(u, v)] = flow.get((u, v), ZERO) + x
    else:
        flow[(v, u)] = flow.get((v, u), ZERO) - x


def add_scaled(target: dict, flow: dict, scale=1) -> None:
    for key, x in flow.items():
        target[key] = target.get(key, ZERO) + scale * x


def map_flow(flow: dict, vertex_map) -> dict:
    """Relabel a signed flow's endpoints, keeping orientation consistent."""
    out = {}
    for (u, v), x in flow.items():
        add_signed(out, vertex_map[u], vertex_map[v], x)
    return out


@dataclass
class FlowAssignment:
    """Nonnegative flow values on directed edges."""

    values: dict[tuple[int, int], Fraction]
    tag: str = "aggregated"

    @classmethod
    def from_signed(cls, flow: dict, tag: str = "aggregated") -> "FlowAssignment":
        values = {}
        for (u, v), x in flow.items():
            if x > 0:
                values[(u, v)] = x
            elif x < 0:
                values[(v, u)] = -x
        return cls(values, tag)

    def net_out(self) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for (u, v), x in self.values.items():
            out[u] = out.get(u, ZERO) + x
            out[v] = out.get(v, ZERO) - x
        return out


@dataclass
class MSFProblem:
    """Multi-way single-commodity flow problem ``(sigma, delta, S, F)``.

    ``sigma`` and ``delta`` are scalars or per-vertex dicts.  When ``delta``
    is omitted it is ``|S| sigma / |F|`` (scalar ``sigma`` only).
    """

    sigma: object
    sources: frozenset
    sinks: frozenset
    delta: object = None

    def __post_init__(self):
        self.sources = frozenset(self.sources)
        self.sinks = frozenset(self.sinks)
        if self.delta is None:
            if isinstance(self.sigma, dict):
                total = sum(self.sigma.get(v, ZERO) for v in self.sources)
                self.delta = Q(total) / len(self.sinks)
            else:
                self.delta = Q(self.sigma) * len(self.sources) / len(self.sinks)
        if self.total_surplus() != self.total_demand():
            raise ValueError("total surplus must equal total demand")

    def surplus(self, v) -> Fraction:
        if v not in self.sources:
            return ZERO
        return Q(self.sigma[v] if isinstance(self.sigma, dict) else self.sigma)

    def demand(self, v) -> Fraction:
        if v not in self.sinks:
            return ZERO
        return Q(self.delta[v] if isinstance(self.delta, dict) else self.delta)

    def total_surplus(self) -> Fraction:
        return sum((self.surplus(v) for v in self.sources), ZERO)

    def total_demand(self) -> Fraction:
        return sum((self.demand(v) for v in self.sinks), ZERO)

    @classmethod
    def from_supply(cls, supply: dict) -> "MSFProblem":
        """Problem whose net outflow at v is ``supply[v]`` (zero total)."""
        src = {v: x for v, x in supply.items() if x > 0}
        dst = {v: -x for v, x in supply.items() if x < 0}
        return cls(src, frozenset(src), frozenset(dst), dst)


@dataclass
class Validation:
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]


def _as_assignment(phi) -> FlowAssignment:
    if isinstance(phi, FlowAssignment):
        return phi
    return FlowAssignment.from_signed(phi)


def _edge_checks(g: Graph, phi: FlowAssignment) -> list[Check]:
    bad_support = [e for e in phi.values if e[1] not in g.adjacency[e[0]]]
    negative = [e for e, x in phi.values.items() if x < 0]
    both = sorted(
        e for e, x in phi.values.items()
        if e[0] < e[1] and x > 0 and phi.values.get((e[1], e[0]), ZERO) > 0
    )
    return [
        Check("support", not bad_support, f"non-edges={bad_support[:5]}"),
        Check("nonnegative", not negative, f"negative={negative[:5]}"),
        Check("antisymmetric", not both, f"both-directions={both[:5]}"),
    ]


def validate_flow(g: Graph, phi, s: int, t: int, unit=1) -> Validation:
    """Check a single s-t flow of value ``unit`` exactly."""
    phi = _as_assignment(phi)
    checks = _edge_checks(g, phi)
    net = phi.net_out()
    unit = Q(unit)
    if s == t:
        bad = sorted(v for v, x in net.items() if x != 0)
        checks.append(Check("conservation", not bad, f"violations at {bad[:5]}"))
        return Validation(checks)
    checks.append(Check("source", net.get(s, ZERO) == unit, f"out(s)={net.get(s, ZERO)} unit={unit}"))
    checks.append(Check("sink", -net.get(t, ZERO) == unit, f"in(t)={-net.get(t, ZERO)} unit={unit}"))
    bad = sorted(v for v, x in net.items() if x != 0 and v not in (s, t))
    checks.append(Check("conservation", not bad, f"violations at {bad[:5]}"))
    return Validation(checks)


def validate_msf(g: Graph, phi, p: MSFProblem) -> Validation:
    """Net outflow must be sigma on S\\F, -delta on F\\S, sigma-delta on S&F, else 0."""
    phi = _as_assignment(phi)
    checks = _edge_checks(g, phi)
    net = phi.net_out()
    bad = []
    for v in set(net) | p.sources | p.sinks:
        if net.get(v, ZERO) != p.surplus(v) - p.demand(v):
            bad.append(v)
    bad.sort()
    checks.append(Check("conservation", not bad, f"violations at {bad[:5]}"))
    return Validation(checks)


# ---------------------------------------------------------------------------
# Shortest-path flows
# ---------------------------------------------------------------------------

def source_flow(adjacency, s: int, weights=None) -> dict:
    """Flow out of ``s`` sending ``weights[t]`` (default 1) to every t != s,
    each unit split equally over all shortest s-t paths.

    Returned as a signed flow; every edge carries flow away from ``s``.
    """
    dist = {s: 0}
    sigma = {s: 1}
    preds: dict[int, list[int]] = {s: []}
    order = []
    queue = deque([s])
    while queue:
        u = queue.popleft()
        order.append(u)
        for w in adjacency[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                sigma[w] = 0
                preds[w] = []
                queue.append(w)
            if dist[w] == dist[u] + 1:
                sigma[w] += sigma[u]
                preds[w].append(u)
    delta = {v: ZERO for v in order}
    flow = {}
    for w in reversed(order):
        if w == s:
            continue
        wt = 1 if weights is None else weights.get(w, ZERO)
        carry = wt + delta[w]
        if not carry:
            continue
        sw = sigma[w]
        for u in preds[w]:
            x = Q(sigma[u], sw) * carry
            add_signed(flow, u, w, x)
            delta[u] += x
    return flow


class Loads:
    """Directed edge loads on ``order`` vertices, accumulated exactly."""

    def __init__(self, order: int):
        self.order = order
        self.values: dict[tuple[int, int], Fraction] = {}

    def add(self, flow: dict, scale=1) -> None:
        vals = self.values
        for (u, v), x in flow.items():
            x = x * scale
            if x > 0:
                vals[(u, v)] = vals.get((u, v), ZERO) + x
            elif x < 0:
                vals[(v, u)] = vals.get((v, u), ZERO) - x

    def merge(self, other: "Loads") -> None:
        for e, x in other.values.items():
            self.values[e] = self.values.get(e, ZERO) + x

    def max_edge(self) -> tuple[Fraction, tuple[int, int] | None]:
        best, arg = ZERO, None
        for e in sorted(self.values):
            if self.values[e] > best:
                best, arg = self.values[e], e
        return best, arg

    def congestion(self) -> Fraction:
        return self.max_edge()[0] / self.order


@dataclass
class CongestionReport:
    order: int
    phi_max: Fraction
    argmax: tuple[int, int] | None
    stages: dict[str, Fraction] = field(default_factory=dict)
    levels: list[Fraction] = field(default_factory=list)
    details: dict = field(default_factory=dict)
    validations: dict[str, int] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.phi_max = exact(self.phi_max)
        self.stages = exact(self.stages)
        self.levels = exact(self.levels)
        self.details = exact(self.details)

    @property
    def valid(self) -> bool:
        return not self.failures

    @property
    def expansion_lower_bound(self) -> Fraction:
        return 1 / (2 * self.phi_max) if self.phi_max else Fraction(0)


class _Validator:
    """Collects validation outcomes for a report without keeping the flows."""

    def __init__(self, g: Graph, enabled: bool = True):
        self.g = g
        self.enabled = enabled
        self.counts: dict[str, int] = {}
        self.failures: list[str] = []

    def msf(self, name: str, flow: dict, problem: MSFProblem) -> None:
        if not self.enabled:
            return
        v = validate_msf(self.g, flow, problem)
        self.counts[name] = self.counts.get(name, 0) + 1
        if not v.ok:
            self.failures.append(f"{name}: " + "; ".join(f"{c.name} {c.detail}" for c in v.failed()))

    def supply(self, name: str, flow: dict, supply: dict) -> None:
        if self.enabled:
            self.msf(name, flow, MSFProblem.from_supply(supply))


def _report(loads: Loads, validator: _Validator, **kw) -> CongestionReport:
    top, arg = loads.max_edge()
    return CongestionReport(
        loads.order, top / loads.order, arg,
        validations=dict(validator.counts), failures=list(validator.failures), **kw,
    )


def baseline_uniform_mcf(g: Graph, validate: bool = True) -> CongestionReport:
    """Uniform multicommodity flow over ordered pairs s != t, each unit split
    equally among shortest paths.  Commodities are aggregated per source,
    which never cancels anything since all of them flow away from the source.
    """
    if not is_connected(g.adjacency):
        raise ValueError("uniform flows need a connected graph")
    order = g.order
    loads = Loads(order)
    val = _Validator(g, validate)
    everything = frozenset(range(order))
    for s in range(order):
        f = source_flow(g.adjacency, s)
        val.msf("per-source", f, MSFProblem(order - 1, {s}, everything - {s}, 1) if order > 1
                else MSFProblem(0, {s}, {s}, 0))
        loads.add(f)
    return _report(loads, val)


def uniform_congestion(g: Graph) -> Fraction:
    return baseline_uniform_mcf(g, validate=False).phi_max


# ---------------------------------------------------------------------------
# Pairwise (hierarchical) balancing
# ---------------------------------------------------------------------------

def exchange_amounts(sigma: list, sizes: list[int], total: int | None = None) -> dict:
    """Amounts group ``i`` sends group ``j`` when ``sigma[i] > sigma[j]``.

    ``sigma`` is the per-vertex surplus of each group, ``sizes`` the group
    sizes, ``total`` the size of their union.
    """
    total = sum(sizes) if total is None else total
    out = {}
    for i, si in enumerate(sigma):
        for j, sj in enumerate(sigma):
            if Q(si) > Q(sj):
                out[(i, j)] = (Q(si) - Q(sj)) * sizes[i] * sizes[j] / total
    return out


def balance(adjacency, node: HierarchyNode, supply: dict) -> dict:
    """Signed flow moving ``supply`` to the uniform distribution on
    ``node.members`` with the same total.

    At every node of the hierarchy, child groups exchange
    ``(avg_i - avg_j)|G_i||G_j|/|X|`` over their shared edges, split equally,
    and the updated surpluses recurse into the children.  Each edge is used
    at one node only, so the result is antisymmetric.  The map is linear.
    """
    supply = {v: Q(supply.get(v, 0)) for v in node.members}
    flow: dict = {}
    stack = [node]
    while stack:
        nd = stack.pop()
        if not nd.children:
            continue
        gid = {}
        for idx, child in enumerate(nd.children):
            for v in child.members:
                gid[v] = idx
        r = len(nd.children)
        sizes = [len(c.members) for c in nd.children]
        totals = [ZERO] * r
        for v in nd.members:
            totals[gid[v]] += supply[v]
        avg = [totals[i] / sizes[i] for i in range(r)]
        if len(set(avg)) > 1:
            boundary: dict[tuple[int, int], list] = {}
            for u in nd.members:
                gu = gid[u]
                for w in adjacency[u]:
                    gw = gid.get(w)
                    if gw is not None and gw > gu:
                        boundary.setdefault((gu, gw), []).append((u, w))
            size = len(nd.members)
            for a in range(r):
                for b in range(a + 1, r):
                    amount = (avg[a] - avg[b]) * sizes[a] * sizes[b] / size
                    if not amount:
                        continue
                    edges = boundary.get((a, b))
                    if not edges:
                        raise ValueError(f"groups {a} and {b} share no edge")
                    share = amount / len(edges)
                    for u, w in edges:
                        add_signed(flow, u, w, share)
                        supply[u] -= share
                        supply[w] += share
        stack.extend(nd.children)
    return flow


def solve_msf_pairwise(g: Graph, hierarchy: HierarchyNode, p: MSFProblem) -> dict:
    """Solve an MSF whose sources are a union of top-level groups carrying a
    uniform surplus per group, and whose sinks are all members."""
    members = frozenset(hierarchy.members)
    if p.sinks != members:
        raise ValueError("sink set must be every vertex of the hierarchy")
    groups = [frozenset(c.members) for c in hierarchy.children] or [members]
    for grp in groups:
        inside = grp & p.sources
        if inside and inside != grp:
            raise ValueError("source set is not a union of classes")
        if inside and len({p.surplus(v) for v in grp}) != 1:
            raise ValueError("surplus must be uniform on each class")
    if len({p.demand(v) for v in members}) != 1:
        raise ValueError("demand must be uniform")
    supply = {v: p.surplus(v) for v in p.sources}
    return balance(g.adjacency, hierarchy, supply)


# ---------------------------------------------------------------------------
# Flows inside classes
# ---------------------------------------------------------------------------

class ClassFlows:
    """Transport of mass inside the classes of a cover.

    Each class is handled in a local copy: the type-A witness graph for type
    B and D covers (shared by all classes), otherwise the induced subgraph.
    ``method`` is ``"product"`` (through the class's uniform shortest-path
    flow) or ``"pairwise"`` (hierarchical balancing).  Both maps are linear,
    so flows are cached per local distribution and combined.
    """

    def __init__(self, g: Graph, cover: ClassCover, method: str = "product"):
        if method not in ("product", "pairwise"):
            raise ValueError(f"unknown class-flow method {method!r}")
        self.g = g
        self.cover = cover
        self.method = method
        self.local: list[Graph] = []
        self.to_global: list[list[int]] = []
        self.from_global: list[dict[int, int]] = []
        self._unit: dict = {}
        self._dist_cache: dict = {}
        self._hier: dict = {}
        self._rho: dict = {}
        if isinstance(g, FlipGraph) and g.family in (Family.B, Family.D) and cover.ids and \
                cover.ids[0].kind != "central-triangle":
            target = cached_graph(Family.A, g.n - 1)
            for cid in cover.ids:
                w = class_iso_witness(g, cid, cover)
                tg = [0] * target.order
                for u, a in zip(w.members, w.image):
                    tg[a] = u
                self.local.append(target)
                self.to_global.append(tg)
                self.from_global.append(dict(zip(w.members, w.image)))
        else:
            for mem in cover.members:
                sub, members = g.induced(mem)
                self.local.append(sub)
                self.to_global.append(members)
                self.from_global.append({v: i for i, v in enumerate(members)})

    def unit_flow(self, c: int, v: int) -> dict:
        """Local signed flow from local vertex ``v`` (mass 1) to uniform."""
        lg = self.local[c]
        key = (id(lg), v)
        if key not in self._unit:
            f = source_flow(lg.adjacency, v)
            self._unit[key] = {e: x / lg.order for e, x in f.items()}
        return self._unit[key]

    def class_congestion(self, c: int) -> Fraction:
        """Congestion of the uniform shortest-path flow inside class ``c``."""
        lg = self.local[c]
        if id(lg) not in self._rho:
            loads = Loads(lg.order)
            for v in range(lg.order):
                loads.add(self.unit_flow(c, v))
            self._rho[id(lg)] = exact(loads.max_edge()[0])
        return self._rho[id(lg)]

    @property
    def rho(self) -> Fraction:
        return max(self.class_congestion(c) for c in range(self.cover.k))

    def hierarchy(self, c: int) -> HierarchyNode:
        lg = self.local[c]
        if id(lg) not in self._hier:
            if not isinstance(lg, FlipGraph) or lg.family is not Family.A:
                raise ValueError("pairwise balancing needs type-A classes")
            self._hier[id(lg)] = type_a_hierarchy(lg)
        return self._hier[id(lg)]

    def _local_flow(self, c: int, dist: tuple) -> dict:
        lg = self.local[c]
        key = (id(lg), dist)
        if key not in self._dist_cache:
            if self.method == "product":
                out: dict = {}
                for v, x in dist:
                    add_scaled(out, self.unit_flow(c, v), x)
            else:
                supply = {v: x for v, x in dist}
                share = Q(1, lg.order)
                for v in range(lg.order):
                    supply[v] = supply.get(v, ZERO) - share
                out = balance(lg.adjacency, self.hierarchy(c), supply)
            self._dist_cache[key] = out
        return self._dist_cache[key]

    def transport(self, c: int, terms) -> dict:
        """Signed global flow realising ``sum(coef * dist)`` inside class c.

        ``terms`` is a list of ``(coef, dist)`` with ``dist`` a probability
        dict on global vertices of the class; the coefficients must sum to 0.
        """
        if sum((coef for coef, _ in terms), ZERO) != 0:
            raise ValueError("transport terms must have zero total")
        fg = self.from_global[c]
        local: dict = {}
        for coef, dist in terms:
            if not coef:
                continue
            key = tuple(sorted((fg[v], Q(x)) for v, x in dist.items() if x))
            for e, x in self._local_flow(c, key).items():
                local[e] = local.get(e, ZERO) + coef * x
        return map_flow({e: x for e, x in local.items() if x}, self.to_global[c])


def uniform_on(vertices) -> dict:
    vertices = list(vertices)
    share = Q(1, len(vertices))
    return {v: share for v in vertices}


def _marginal(pairs, side: int) -> dict:
    out: dict = {}
    share = Q(1, len(pairs))
    for p in pairs:
        out[p[side]] = out.get(p[side], ZERO) + share
    return out


def _supply_of(terms) -> dict:
    out: dict = {}
    for coef, dist in terms:
        for v, x in dist.items():
            out[v] = out.get(v, ZERO) + coef * x
    return out


def _transmit(flow: dict, supply: dict, pairs, amount: Fraction) -> None:
    share = amount / len(pairs)
    for u, v in pairs:
        if u != v:
            add_signed(flow, u, v, share)
        supply[u] = supply.get(u, ZERO) + share
        supply[v] = supply.get(v, ZERO) - share


# ---------------------------------------------------------------------------
# Composition through a projection graph
# ---------------------------------------------------------------------------

def shortest_path_routes(pg: Graph) -> dict[tuple[int, int], list[tuple[tuple, Fraction]]]:
    """All shortest paths between ordered node pairs, equally weighted."""
    k = pg.order
    routes = {}
    for s in range(k):
        dist = {s: 0}
        paths = {s: [(s,)]}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in pg.adjacency[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    paths[w] = []
                    queue.append(w)
                if dist[w] == dist[u] + 1:
                    paths[w].extend(p + (w,) for p in paths[u])
        for t in range(k):
            if t != s:
                ps = sorted(paths[t])
                routes[(s, t)] = [(p, Q(1, len(ps))) for p in ps]
    return routes


class _Composer:
    """Shared machinery: shuffles, per-group MSFs, stage loads."""

    def __init__(self, g: Graph, cover: ClassCover, method: str, validate: bool):
        self.g = g
        self.cover = cover
        self.flows = ClassFlows(g, cover, method)
        self.shuffle_flows = ClassFlows(g, cover, "product") if method != "product" else self.flows
        self.order = g.order
        self.home = cover.home(g.order)
        self.homes = [[v for v in range(g.order) if self.home[v] == i] for i in range(cover.k)]
        self.val = _Validator(g, validate)
        self.total = Loads(g.order)
        self.stage_loads: dict[str, Loads] = {}
        self._pairs: dict = {}

    def pairs(self, a: int, b: int):
        if (a, b) not in self._pairs:
            if (b, a) in self._pairs:
                self._pairs[(a, b)] = [(v, u) for u, v in self._pairs[(b, a)]]
            else:
                self._pairs[(a, b)] = boundary_edges(self.g, self.cover, a, b).pairs
        return self._pairs[(a, b)]

    def stage(self, name: str) -> Loads:
        if name not in self.stage_loads:
            self.stage_loads[name] = Loads(self.order)
        return self.stage_loads[name]

    def shuffle(self) -> None:
        """Every source spreads its |V| units uniformly over its home class."""
        loads = self.stage("shuffle")
        everything = self.order
        for s in range(self.order):
            c = self.home[s]
            local = self.shuffle_flows.from_global[c][s]
            f = map_flow(self.shuffle_flows.unit_flow(c, local), self.shuffle_flows.to_global[c])
            f = {e: x * everything for e, x in f.items()}
            members = self.cover.members[c]
            delta = Q(everything, len(members))
            self.val.msf("shuffle", f, MSFProblem(everything, {s}, members, delta))
            loads.add(f)
            self.total.add(f)

    def class_stage(self, name: str, c: int, terms, group_flow: dict) -> None:
        f = self.flows.transport(c, terms)
        self.val.supply(name, f, _supply_of(terms))
        self.stage(name).add(f)
        add_scaled(group_flow, f)

    def finish_group(self, i: int, group_flow: dict, start: Fraction) -> None:
        """Validate the aggregated MSF of group i and record its load."""
        members = self.cover.members[i]
        size = len(self.homes[i])
        sigma = start / len(members)
        if self.val.enabled:
            supply = {v: sigma for v in members}
            for v in range(self.order):
                supply[v] = supply.get(v, ZERO) - size
            self.val.supply("group", group_flow, supply)
        self.total.add(group_flow)

    def report(self, **details) -> CongestionReport:
        stages = {name: l.congestion() for name, l in self.stage_loads.items()}
        rep = _report(self.total, self.val, stages=stages, details=details)
        return rep


def compose_flows(
    g: Graph,
    cover: ClassCover,
    method: str = "product",
    projection: ProjectionGraph | None = None,
    validate: bool = True,
) -> CongestionReport:
    """Uniform multicommodity flow assembled from class flows and a
    shortest-path flow on the projection graph.

    Sources shuffle over their home class (the first class containing them).
    The aggregated mass of home class i bound for home class j follows every
    shortest projection path equally; each projection step concentrates on
    the weighted pairs between consecutive classes, crosses them uniformly,
    and the last class spreads it over home class j.
    """
    pg = projection or projection_graph(g, cover)
    if cover.k > 1 and not pg.is_connected():
        raise ValueError("projection graph is disconnected")
    comp = _Composer(g, cover, method, validate)
    comp.shuffle()
    routes = shortest_path_routes(pg.graph()) if cover.k > 1 else {}
    order = g.order
    raw_transmit: dict = {}
    for i in range(cover.k):
        hi = comp.homes[i]
        if not hi:
            continue
        members_i = cover.members[i]
        start = Q(len(hi) * order)
        group_flow: dict = {}
        terms: dict[str, dict[int, list]] = {"concentrate": {}, "relay": {}, "distribute": {}}
        tx: dict = {}
        tx_supply: dict = {}
        u_i = uniform_on(members_i)
        for j in range(cover.k):
            hj = comp.homes[j]
            if not hj:
                continue
            amount = Q(len(hi) * len(hj))
            if j == i:
                terms["concentrate"].setdefault(i, []).extend([(amount, u_i), (-amount, uniform_on(hj))])
                continue
            for path, weight in routes[(i, j)]:
                a = amount * weight
                for step, (x, y) in enumerate(zip(path, path[1:])):
                    prs = comp.pairs(x, y)
                    name = "concentrate" if step == 0 else "relay"
                    arrive = u_i if step == 0 else _marginal(comp.pairs(path[step - 1], x), 1)
                    terms[name].setdefault(x, []).extend([(a, arrive), (-a, _marginal(prs, 0))])
                    _transmit(tx, tx_supply, prs, a)
                    key = (x, y)
                    raw_transmit[key] = raw_transmit.get(key, ZERO) + a / len(prs)
                last = comp.pairs(path[-2], path[-1])
                terms["distribute"].setdefault(j, []).extend([(a, _marginal(last, 1)), (-a, uniform_on(hj))])
        for name in ("concentrate", "relay", "distribute"):
            for c, ts in sorted(terms[name].items()):
                comp.class_stage(name, c, ts, group_flow)
        comp.val.supply("transmit", tx, tx_supply)
        comp.stage("transmit").add(tx)
        add_scaled(group_flow, tx)
        comp.finish_group(i, group_flow, start)
    rho = comp.flows.rho
    rho_bar = uniform_congestion(pg.graph()) if cover.k > 1 else ZERO
    k, gam, e_min = cover.k, pg.gamma, pg.e_min
    details = {
        "k": k,
        "gamma": gam,
        "e_min": e_min,
        "rho": rho,
        "rho_bar": rho_bar,
        "method": method,
        "projection_bound": (2 * gam * k * rho_bar + 1) * rho,
        "emin_bound": ((Q(2 * gam * order, e_min) + 1) * k * rho) if e_min else rho,
        "transmit_per_pair_edge": raw_transmit,
    }
    return comp.report(**details)


# ---------------------------------------------------------------------------
# Type B constructions
# ---------------------------------------------------------------------------

def _typeb_setup(n: int):
    g = cached_graph(Family.B, n)
    return g, classes(g)


def pipeline_flow_typeB(n: int, method: str = "pairwise", validate: bool = True) -> CongestionReport:
    """Shuffle, concentrate, transmit and distribute between every pair of
    central-diagonal classes, transmitting directly over their shared edges.

    ``method`` picks the in-class flows for concentration and distribution;
    the shuffle always uses the class's uniform shortest-path flow.
    """
    g, cover = _typeb_setup(n)
    pg = projection_graph(g, cover)
    rep = compose_flows(g, cover, method=method, projection=pg, validate=validate)
    rep.details["class_size"] = catalan(n)
    # the shuffle of a single unit pair inside a class, normalised by |V|
    rep.details["shuffle_intra"] = rep.details["rho"] * catalan(n) / g.order
    return rep


def merge_schedule(k: int, variant: str = "hierarchical") -> list[tuple[int, tuple, tuple]]:
    """``(level, left, right)`` merges of the class sequence ``0..k-1``.

    Level ``l`` merges the two halves of each aligned block of ``2**l``
    positions; the sequence is padded to a power of two, so the last block of
    a level may be short and merges with an empty half are skipped.
    """
    if variant == "naive":
        return [(1, tuple(range(k)), ())]
    if variant != "hierarchical":
        raise ValueError(f"unknown variant {variant!r}")
    out = []
    level = 1
    while 2 ** (level - 1) < k:
        width = 2**level
        for lo in range(0, k, width):
            mid = lo + width // 2
            left = tuple(range(lo, min(mid, k)))
            right = tuple(range(mid, min(lo + width, k)))
            if left and right:
                out.append((level, left, right))
        level += 1
    return out


def hierarchical_flow_typeB(
    n: int, variant: str = "hierarchical", method: str = "pairwise", validate: bool = True
) -> CongestionReport:
    """Solve the MSFs ``(sigma=|V|, S=Psi(D_i), F=V)`` for all classes i.

    Classes are merged in contiguous blocks; at the merge of blocks H and H'
    every class of the block holding group i's mass sends ``m/(|H|+|H'|)`` to
    each class of the other block, where ``m`` is the class's current mass.
    The ``"naive"`` variant sends directly from class i to every class.
    """
    g, cover = _typeb_setup(n)
    k = cover.k
    comp = _Composer(g, cover, method, validate)
    order = g.order
    size = len(cover.members[0])
    unif = [uniform_on(m) for m in cover.members]
    schedule = merge_schedule(k, variant)
    levels = sorted({lv for lv, _, _ in schedule})
    level_loads = {lv: Loads(order) for lv in levels}
    bset: dict = {}

    def boundary(a, b):
        if (a, b) not in bset:
            bset[(a, b)] = comp.pairs(a, b)
        return bset[(a, b)]

    for i in range(k):
        total = Q(order * size)
        mass = {i: total}
        group_flow: dict = {}
        for lv in levels:
            level_flow: dict = {}
            terms: dict[int, list] = {}
            tx: dict = {}
            tx_supply: dict = {}
            for level, left, right in schedule:
                if level != lv:
                    continue
                if variant == "naive":
                    senders, receivers = [i], [c for c in range(k) if c != i]
                    share = total / k
                elif i in left:
                    senders, receivers = left, right
                    share = None
                elif i in right:
                    senders, receivers = right, left
                    share = None
                else:
                    continue
                span = len(left) + len(right)
                moves = []
                for a in senders:
                    amt = share if share is not None else mass[a] / span
                    for b in receivers:
                        moves.append((a, b, amt))
                for a, b, amt in moves:
                    prs = boundary(a, b)
                    terms.setdefault(a, []).extend([(amt, unif[a]), (-amt, _marginal(prs, 0))])
                    terms.setdefault(b, []).extend([(amt, _marginal(prs, 1)), (-amt, unif[b])])
                    _transmit(tx, tx_supply, prs, amt)
                    mass[a] -= amt
                    mass[b] = mass.get(b, ZERO) + amt
            if not terms:
                continue
            for c, ts in sorted(terms.items()):
                f = comp.flows.transport(c, ts)
                comp.val.supply("class", f, _supply_of(ts))
                add_scaled(level_flow, f)
            comp.val.supply("transmit", tx, tx_supply)
            add_scaled(level_flow, tx)
            level_loads[lv].add(level_flow)
            add_scaled(group_flow, level_flow)
        if any(mass.get(c, ZERO) != total / k for c in range(k)):
            comp.val.failures.append(f"group {i}: final class masses are not uniform")
        comp.finish_group(i, group_flow, total)
    rep = comp.report(variant=variant, method=method, k=k)
    rep.levels = [exact(level_loads[lv].congestion()) for lv in levels]
    return rep


def typeB_surplus(n: int) -> dict[int, Fraction]:
    """Per-edge transmitted surplus |Psi(D)||Psi(D_j)|/|E(D,D_j)| by offset j."""
    size = catalan(n)
    return {j: Fraction(size * size, catalan(j - 1) * catalan(n - j)) for j in range(1, n + 1)}


__all__ = [
    "CongestionReport",
    "FlowAssignment",
    "MSFProblem",
    "Validation",
    "balance",
    "baseline_uniform_mcf",
    "compose_flows",
    "exchange_amounts",
    "hierarchical_flow_typeB",
    "merge_schedule",
    "pipeline_flow_typeB",
    "solve_msf_pairwise",
    "source_flow",
    "typeB_surplus",
    "validate_flow",
    "validate_msf",
]
