"""Lazy random walks on flip graphs: mixing, spectral gap and expansion."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from .combinatorics import Family, catalan
from .decomposition import (
    cached_cover,
    central_triangle_partition,
    classes,
    cyclic_distance,
    type_b_pair_edges,
)
from .flipgraph import Graph, cached_graph, is_connected

DEFAULT_EPS = Fraction(1, 4)
EXACT_THRESHOLD = 4096
BRUTE_FORCE_CAP = 24


class ThresholdExceeded(RuntimeError):
    """A computation was refused because the graph is above a size cap."""


# ---------------------------------------------------------------------------
# Transition operator and total variation
# ---------------------------------------------------------------------------

class LazyTransitionOperator:
    """P(v,v) = 1/2 and P(v,u) = 1/(2 deg v) for each neighbour u."""

    def __init__(self, g: Graph):
        if not is_connected(g.adjacency):
            raise ValueError("the walk needs a connected graph")
        self.g = g
        self.degrees = [len(a) for a in g.adjacency]
        self.order = g.order

    @property
    def regular_degree(self) -> int | None:
        ds = set(self.degrees)
        return ds.pop() if len(ds) == 1 else None

    def entry(self, v: int, u: int) -> Fraction:
        if u == v:
            return Fraction(1, 2)
        if u in self.g.adjacency[v]:
            return Fraction(1, 2 * self.degrees[v])
        return Fraction(0)

    def row(self, v: int) -> dict[int, Fraction]:
        out = {v: Fraction(1, 2)}
        for u in self.g.adjacency[v]:
            out[u] = Fraction(1, 2 * self.degrees[v])
        return out

    def row_sums(self) -> list[Fraction]:
        return [sum(self.row(v).values()) for v in range(self.order)]

    def stationary(self) -> list[Fraction]:
        total = sum(self.degrees)
        return [Fraction(d, total) for d in self.degrees]

    def step(self, mu: list[Fraction]) -> list[Fraction]:
        out = [x / 2 for x in mu]
        for v, x in enumerate(mu):
            if x:
                share = x / (2 * self.degrees[v])
                for u in self.g.adjacency[v]:
                    out[u] += share
        return out

    def dense(self) -> np.ndarray:
        m = np.zeros((self.order, self.order))
        for v in range(self.order):
            m[v, v] = 0.5
            for u in self.g.adjacency[v]:
                m[v, u] = 0.5 / self.degrees[v]
        return m


def lazy_transition(g: Graph) -> LazyTransitionOperator:
    return LazyTransitionOperator(g)


def tv_distance(mu, nu) -> Fraction:
    """Half the L1 distance between two distributions given as sequences."""
    mu = [Fraction(x) for x in mu]
    nu = [Fraction(x) for x in nu]
    if len(mu) != len(nu):
        raise ValueError("distributions live on different sets")
    for d in (mu, nu):
        if sum(d) != 1 or any(x < 0 for x in d):
            raise ValueError("input is not a probability distribution")
    return sum(abs(a - b) for a, b in zip(mu, nu)) / 2


# ---------------------------------------------------------------------------
# Exact mixing time
# ---------------------------------------------------------------------------

@dataclass
class MixingReport:
    eps: Fraction
    tau: int
    worst_start: int
    curve: list[Fraction]
    starts: list[int]
    lower_bound: bool = False


def _tv_curve_regular(g: Graph, starts: list[int], deg: int, max_steps: int, eps: Fraction):
    """Integer iteration: mu_t = N_t / (2 deg)^t with N_{t+1} = deg N_t + A N_t."""
    order = g.order
    nb = np.array(g.adjacency, dtype=np.int64)
    states = np.zeros((len(starts), order), dtype=object)
    states[:, :] = 0
    for row, s in enumerate(starts):
        states[row, s] = 1
    curve, worst = [], []
    t = 0
    while True:
        scale = (2 * deg) ** t
        gaps = np.abs(states * order - scale).sum(axis=1)
        best = int(np.argmax(gaps))
        tv = Fraction(int(gaps[best]), 2 * order * scale)
        curve.append(tv)
        worst.append(starts[best])
        if tv < eps or t >= max_steps:
            return curve, worst
        states = deg * states + states[:, nb].sum(axis=2)
        t += 1


def _tv_curve_general(op: LazyTransitionOperator, starts, max_steps, eps):
    pi = op.stationary()
    mus = []
    for s in starts:
        mu = [Fraction(0)] * op.order
        mu[s] = Fraction(1)
        mus.append(mu)
    curve, worst = [], []
    t = 0
    while True:
        tvs = [sum(abs(a - b) for a, b in zip(mu, pi)) / 2 for mu in mus]
        best = max(range(len(tvs)), key=lambda i: tvs[i])
        curve.append(tvs[best])
        worst.append(starts[best])
        if tvs[best] < eps or t >= max_steps:
            return curve, worst
        mus = [op.step(mu) for mu in mus]
        t += 1


def exact_mixing_time(
    g: Graph,
    eps=DEFAULT_EPS,
    starts="all",
    threshold: int = EXACT_THRESHOLD,
    max_steps: int = 100_000,
) -> MixingReport:
    """Smallest t with max over starts of TV(P^t(s, .), pi) < eps, exactly.

    With ``starts`` a list of vertices the result is a lower bound on the
    true mixing time.
    """
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    op = lazy_transition(g)
    if starts == "all":
        if g.order > threshold:
            raise ThresholdExceeded(
                f"|V|={g.order} exceeds the exact threshold {threshold}; pass selected starts instead"
            )
        chosen = list(range(g.order))
        lower = False
    else:
        chosen = sorted(set(starts))
        lower = len(chosen) < g.order
    deg = op.regular_degree
    if deg:
        curve, worst = _tv_curve_regular(g, chosen, deg, max_steps, eps)
    else:
        curve, worst = _tv_curve_general(op, chosen, max_steps, eps)
    for a, b in zip(curve, curve[1:]):
        if b > a:
            raise AssertionError("worst-case TV distance increased")
    if curve[-1] >= eps:
        raise ThresholdExceeded(f"no mixing within {max_steps} steps")
    return MixingReport(eps, len(curve) - 1, worst[-1], curve, chosen, lower)


# ---------------------------------------------------------------------------
# Spectral gap
# ---------------------------------------------------------------------------

@dataclass
class SpectralGap:
    gap: float
    lambda2: float
    residual: float
    iterations: int
    converged: bool


def spectral_gap(g: Graph, tol: float = 1e-10, max_iter: int = 200_000, seed: int = 0) -> SpectralGap:
    """1 - lambda_2 of the lazy walk by power iteration orthogonal to the
    stationary direction; the residual ||Mx - lambda x|| is reported.

    The walk is symmetrised as D^(1/2) P D^(-1/2), which has the same
    spectrum, and the spectrum of the lazy walk lies in [0, 1], so the
    dominant eigenvalue after deflation is lambda_2.
    """
    op = lazy_transition(g)
    order = g.order
    if order == 1:
        return SpectralGap(1.0, 0.0, 0.0, 0, True)
    deg = np.array(op.degrees, dtype=float)
    root = np.sqrt(deg)
    top = root / np.linalg.norm(root)
    nbr = [np.array(a, dtype=np.int64) for a in g.adjacency]

    def apply(x):
        y = x / root
        out = 0.5 * x
        spread = np.array([y[a].sum() for a in nbr])
        return out + 0.5 * spread / root

    rng = np.random.default_rng(seed)
    x = rng.standard_normal(order)
    x -= top * (top @ x)
    x /= np.linalg.norm(x)
    lam, res = 0.0, math.inf
    for it in range(1, max_iter + 1):
        y = apply(x)
        y -= top * (top @ y)
        lam = float(x @ y)
        res = float(np.linalg.norm(y - lam * x))
        norm = np.linalg.norm(y)
        if res < tol or norm == 0:
            break
        x = y / norm
    return SpectralGap(1.0 - lam, lam, res, it, res < tol)


def cheeger_consistent(gap: float, h: Fraction | float, d: int, slack: float = 1e-9) -> bool:
    """gap/2 <= h/d <= sqrt(2 gap) for a d-regular graph."""
    ratio = float(h) / d
    return gap / 2 <= ratio + slack and ratio <= math.sqrt(2 * gap) + slack


# ---------------------------------------------------------------------------
# Expansion
# ---------------------------------------------------------------------------

@dataclass
class ExpansionEstimate:
    exact: Fraction | None = None
    witness: list[int] | None = None
    lower: Fraction | float | None = None
    upper: Fraction | None = None
    profile: list[Fraction | None] = field(default_factory=list)
    sources: dict = field(default_factory=dict)

    def consistent(self) -> bool:
        vals = [self.lower, self.exact, self.upper]
        present = [v for v in vals if v is not None]
        return all(a <= b for a, b in zip(present, present[1:]))


def boundary_size(g: Graph, subset) -> int:
    inside = set(subset)
    return sum(1 for u in inside for v in g.adjacency[u] if v not in inside)


def brute_force_expansion(g: Graph, cap: int = BRUTE_FORCE_CAP, chunk_bits: int = 20) -> ExpansionEstimate:
    """Exact expansion by enumerating every subset with at most |V|/2 vertices.

    ``profile[s]`` is the minimum of |dS|/|S| over 1 <= |S| <= s.
    """
    order = g.order
    if order > cap:
        raise ThresholdExceeded(f"|V|={order} exceeds the brute-force cap {cap}")
    if order < 2:
        raise ValueError("expansion needs at least two vertices")
    half = order // 2
    edges = np.array(list(g.edges()), dtype=np.uint64)
    best_b = [None] * (half + 1)
    best_s = [None] * (half + 1)
    total = 1 << order
    step = 1 << min(chunk_bits, order)
    one = np.uint64(1)
    for lo in range(1, total, step):
        masks = np.arange(lo, min(lo + step, total), dtype=np.uint64)
        sizes = np.bitwise_count(masks)
        keep = sizes <= half
        masks, sizes = masks[keep], sizes[keep]
        bnd = np.zeros(len(masks), dtype=np.int64)
        for u, v in edges:
            bnd += (((masks >> u) ^ (masks >> v)) & one).astype(np.int64)
        for s in range(1, half + 1):
            sel = np.nonzero(sizes == s)[0]
            if not len(sel):
                continue
            j = sel[np.argmin(bnd[sel])]
            if best_b[s] is None or bnd[j] < best_b[s]:
                best_b[s] = int(bnd[j])
                best_s[s] = int(masks[j])
    profile: list = [None]
    run, run_s = None, None
    for s in range(1, half + 1):
        r = Fraction(best_b[s], s)
        if run is None or r < run:
            run, run_s = r, s
        profile.append(run)
    mask = best_s[run_s]
    witness = [v for v in range(order) if mask >> v & 1]
    return ExpansionEstimate(exact=run, witness=witness, upper=run, profile=profile,
                             sources={"exact": "exhaustive"})


@dataclass
class CutSpec:
    subset: list[int]
    boundary: int
    ratio: Fraction
    metadata: dict = field(default_factory=dict)


def type_B_half_cut(n: int, g=None) -> CutSpec:
    """The union of classes whose central diagonal has an endpoint in
    [1, floor((n+1)/2)] when the polygon's vertices are numbered 1..2n+2."""
    if g is None:
        g, cover = cached_graph(Family.B, n), cached_cover(Family.B, n)
    else:
        cover = classes(g)
    top = (n + 1) // 2
    xi = [i for i in range(cover.k) if cover.ids[i].key[0] + 1 <= top]
    rest = [i for i in range(cover.k) if i not in xi]
    subset = sorted(v for i in xi for v in cover.members[i])
    bnd = boundary_size(g, subset)
    pairs = []
    predicted = 0
    for a in xi:
        for b in rest:
            d = cyclic_distance(a, b, n)
            e = catalan(d - 1) * catalan(n - d)
            predicted += e
            pairs.append((a + 1, b + 1, d, e))
    meta = {
        "xi": [(cover.ids[i].key[0] + 1, cover.ids[i].key[1] + 1) for i in xi],
        "pairs": pairs,
        "predicted_boundary": predicted,
        "vertices": g.order,
    }
    return CutSpec(subset, bnd, Fraction(bnd, len(subset)), meta)


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log y against log x."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


def pair_ratio_profile(n: int) -> list[tuple[int, int, int, float]]:
    """(class a, class b, d, |E(D,D')|/|Psi(D)| * d^(3/2)) over class pairs, counted
    from the graph."""
    g = cached_graph(Family.B, n)
    cover = cached_cover(Family.B, n)
    k = cover.k
    cls = [0] * g.order
    for i, mem in enumerate(cover.members):
        for v in mem:
            cls[v] = i
    counts: dict[tuple[int, int], int] = {}
    for u, v in g.edges():
        a, b = sorted((cls[u], cls[v]))
        if a != b:
            counts[(a, b)] = counts.get((a, b), 0) + 1
    size = len(cover.members[0])
    keys = [cover.ids[i].key[0] for i in range(k)]
    out = []
    for (a, b), c in sorted(counts.items()):
        if c != type_b_pair_edges(n, keys[a], keys[b]):
            raise AssertionError(f"pair count mismatch at n={n}, classes {a} and {b}")
        d = cyclic_distance(keys[a], keys[b], n)
        out.append((a, b, d, c / size * d**1.5))
    return out


# ---------------------------------------------------------------------------
# Mixing bounds
# ---------------------------------------------------------------------------

def mixing_bound_sinclair(h, max_degree: int, order: int, eps=DEFAULT_EPS) -> int:
    """ceil((2/phi^2)(ln|V| + ln(1/eps))) with conductance phi = h/(2 Delta)."""
    if h <= 0:
        raise ValueError("expansion must be positive")
    phi = float(h) / (2 * max_degree)
    return math.ceil((2 / phi**2) * (math.log(order) + math.log(1 / float(eps))))


@dataclass
class ProfileStep:
    start: Fraction
    end: Fraction
    h: Fraction | float
    source: str
    contribution: float = 0.0


@dataclass
class LovaszKannanBound:
    value: float
    steps: list[ProfileStep]


def lovasz_kannan_bound(profile, max_degree: int, order: int) -> LovaszKannanBound:
    """32 times the integral of Delta^2/(x h(x)^2) over [1/|V|, 1/2].

    ``profile`` lists ``(x_end, h)`` or ``(x_end, h, source)`` meaning
    h(x) = h on ``(x_prev, x_end]``; the first step starts at 1/|V| and the
    last must reach 1/2.  The step function is integrated exactly.
    """
    lo = Fraction(1, order)
    hi = Fraction(1, 2)
    steps = []
    prev = lo
    last_h = None
    for item in profile:
        x_end, h = Fraction(item[0]), item[1]
        source = item[2] if len(item) > 2 else ""
        if h <= 0:
            raise ValueError("profile values must be positive")
        if last_h is not None and h > last_h:
            raise ValueError("profile must be non-increasing in x")
        last_h = h
        end = min(x_end, hi)
        if end > prev:
            steps.append(ProfileStep(prev, end, h, source))
            prev = end
        if prev >= hi:
            break
    if prev < hi:
        raise ValueError("profile does not reach x = 1/2")
    total = 0.0
    for st in steps:
        st.contribution = 32 * max_degree**2 / float(st.h) ** 2 * math.log(st.end / st.start)
        total += st.contribution
    return LovaszKannanBound(total, steps)


def exhaustive_profile(est: ExpansionEstimate, order: int) -> list[tuple]:
    """Step profile from brute force: h(x) = profile[s] on [s/|V|, (s+1)/|V|)."""
    half = len(est.profile) - 1
    out = []
    for s in range(1, half + 1):
        end = Fraction(s + 1, order) if s < half else Fraction(1, 2)
        out.append((end, est.profile[s], "exhaustive"))
    return out


def product_expansion_bound(h_factors) -> Fraction:
    """Half the smallest factor expansion: a Cartesian-product lower bound."""
    hs = list(h_factors)
    if not hs:
        raise ValueError("need at least one factor")
    if any(h <= 0 for h in hs):
        raise ValueError("factor expansions must be positive")
    return Fraction(min(hs)) / 2 if all(isinstance(h, (int, Fraction)) for h in hs) else min(hs) / 2


def type_a_expansion_lower(m: int) -> tuple[Fraction, str]:
    """A certified lower bound on h of the type-A graph of size m."""
    if m <= 0:
        return Fraction(10**9), "single vertex"
    g = cached_graph(Family.A, m)
    if g.order <= BRUTE_FORCE_CAP:
        return brute_force_expansion(g).exact, "exhaustive"
    from .flows import baseline_uniform_mcf

    rep = baseline_uniform_mcf(g, validate=False)
    return rep.expansion_lower_bound, "flow"


def small_set_profile(n: int) -> list[tuple]:
    """Small-set expansion profile of the type-A graph of size n assembled
    from the central-triangle partitions.

    For fineness k the subsets no larger than half the smallest class get the
    product bound of that class's factors (the coarsest partition uses the
    certified bound on the whole graph).  Returned as ``(x_end, h, source)``.
    """
    g = cached_graph(Family.A, n)
    order = g.order
    cache: dict[int, tuple] = {}

    def lower(m):
        if m not in cache:
            cache[m] = type_a_expansion_lower(m)
        return cache[m]

    entries = []
    for k in range(1, n + 1):
        part = central_triangle_partition(n, k, g)
        smallest = min(len(c.members) for c in part.classes)
        if k == 1:
            h, src = lower(n)
            entries.append((Fraction(1, 2), h, f"k=1 {src}"))
            continue
        bounds = []
        srcs = set()
        for c in part.classes:
            sizes = [s for s in c.factor_sizes if s > 0]
            if not sizes:
                continue
            vals = [lower(s) for s in sizes]
            srcs.update(src for _, src in vals)
            bounds.append(product_expansion_bound([v for v, _ in vals]))
        if not bounds:
            continue
        entries.append((Fraction(smallest, 2 * order), min(bounds), f"k={k} product({','.join(sorted(srcs))})"))
    # sort by threshold; each x takes the best bound applicable to it
    entries.sort(key=lambda e: e[0])
    out = []
    for idx, (x_end, _, _) in enumerate(entries):
        h, src = max(((e[1], e[2]) for e in entries[idx:]), key=lambda t: t[0])
        if out and out[-1][1] == h and out[-1][2] == src:
            out[-1] = (x_end, h, src)
        else:
            out.append((x_end, h, src))
    return [e for e in out if e[0] >= Fraction(1, order)] or out[-1:]


def typeB_loose_mixing_bounds(n: int, h, eps=DEFAULT_EPS) -> dict[str, int]:
    """The loose type-B mixing estimate under both parameterisations: degree
    n with binom(2n, n) vertices, and the printed (n-1)^2 with
    binom(2n-2, n-1)."""
    return {
        "degree-n": mixing_bound_sinclair(h, n, comb(2 * n, n), eps),
        "printed": mixing_bound_sinclair(h, n - 1, comb(2 * n - 2, n - 1), eps),
    }
