"""Polygons, diagonals, chords and the triangulations that index the
vertices of the type A, B and D associahedra.

Conventions
-----------
* type A, size ``n``: triangulations of the ``(n+3)``-gon;
* type B, size ``n``: centrally symmetric triangulations of the ``(2n+2)``-gon;
* type D, size ``n``: centrally symmetric triangulations of the punctured
  ``2n``-gon, built from non-central diagonals and central chords.

Polygon vertices are numbered ``0 .. m-1`` counterclockwise.

Every element universe (the set of all diagonals/chords for one family and
size) assigns each element a bit, so a triangulation is also an ``int``
bitmask.  Crossing tests are precomputed into per-element masks.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence, Union


class Family(str, enum.Enum):
    A = "A"
    B = "B"
    D = "D"

    @classmethod
    def parse(cls, value: "Family | str") -> "Family":
        if isinstance(value, Family):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown family {value!r}; expected A, B or D") from None


# type A is allowed down to n=1 (the square) because smaller type-A graphs
# appear as class witnesses of type-B/D graphs
FAMILY_MINIMUM = {Family.A: 1, Family.B: 2, Family.D: 3}

DEFAULT_ENUMERATION_CAP = 250_000


class EnumerationLimitError(RuntimeError):
    """Raised when an enumeration would exceed the configured cap."""


class Orient(str, enum.Enum):
    CW = "+"
    CCW = "-"


@dataclass(frozen=True, order=True)
class Diagonal:
    """A diagonal ``{a, b}`` of a polygon, stored with ``a < b``."""

    a: int
    b: int

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"diagonal endpoints must satisfy a < b, got {self.a}, {self.b}")

    def token(self) -> str:
        return f"{self.a}-{self.b}"


@dataclass(frozen=True, order=True)
class Central:
    """A central chord of the punctured polygon: ``v`` to the central disc."""

    v: int
    orient: Orient

    def token(self) -> str:
        return f"c{self.v}{self.orient.value}"


Element = Union[Diagonal, Central]


def diagonal(a: int, b: int) -> Diagonal:
    return Diagonal(min(a, b), max(a, b))


def check_size(family: Family | str, n: int) -> Family:
    family = Family.parse(family)
    if not isinstance(n, int) or n < FAMILY_MINIMUM[family]:
        raise ValueError(
            f"n={n!r} is below the minimum {FAMILY_MINIMUM[family]} for type {family.value}"
        )
    return family


def polygon_size(family: Family | str, n: int) -> int:
    family = Family.parse(family)
    return {Family.A: n + 3, Family.B: 2 * n + 2, Family.D: 2 * n}[family]


# ---------------------------------------------------------------------------
# Catalan numbers and closed-form counts
# ---------------------------------------------------------------------------

_CATALAN = [1]


def catalan(k: int) -> int:
    """Return the Catalan number ``C_k`` via the convolution recurrence."""
    if k < 0:
        raise ValueError("catalan index must be nonnegative")
    while len(_CATALAN) <= k:
        m = len(_CATALAN)
        _CATALAN.append(sum(_CATALAN[i] * _CATALAN[m - 1 - i] for i in range(m)))
    return _CATALAN[k]


def catalan_closed_form(k: int) -> int:
    return math.comb(2 * k, k) // (k + 1)


def count_vertices(family: Family | str, n: int) -> int:
    """Closed-form number of vertices of the flip graph."""
    family = check_size(family, n)
    if family is Family.A:
        return catalan(n + 1)
    if family is Family.B:
        return math.comb(2 * n, n)
    # (3n-2)/n * binom(2n-2, n-1) is always an integer
    num = (3 * n - 2) * math.comb(2 * n - 2, n - 1)
    assert num % n == 0
    return num // n


# ---------------------------------------------------------------------------
# Crossing and symmetry
# ---------------------------------------------------------------------------

def interleave(a: int, b: int, c: int, d: int) -> bool:
    """True when chords {a,b} and {c,d} of a convex polygon cross strictly."""
    if a > b:
        a, b = b, a
    return (a < c < b) != (a < d < b) and len({a, b, c, d}) == 4


def _strictly_inside_minor_arc(v: int, a: int, b: int, m: int) -> bool:
    # minor arc of a non-diameter diagonal: the side with fewer than m/2 steps
    step = (b - a) % m
    if step < m - step:
        lo, length = a, step
    else:
        lo, length = b, m - step
    off = (v - lo) % m
    return 0 < off < length


def crosses(x: Element, y: Element, family: Family | str, n: int) -> bool:
    """Crossing predicate for two diagonals/chords of the given family."""
    family = Family.parse(family)
    if x == y:
        return False
    if isinstance(x, Diagonal) and isinstance(y, Diagonal):
        return interleave(x.a, x.b, y.a, y.b)
    if family is not Family.D:
        raise TypeError("central chords only exist in type D")
    m = 2 * n
    if isinstance(x, Central) and isinstance(y, Central):
        if x.orient == y.orient:
            return False
        return x.v not in (y.v, (y.v + n) % m)
    if isinstance(x, Central):
        x, y = y, x
    return _strictly_inside_minor_arc(y.v, x.a, x.b, m)


def antipodal_image(x: Element, family: Family | str, n: int) -> Element:
    """Half-turn image of an element: shift by n+1 (type B) or n (type D)."""
    family = Family.parse(family)
    if family is Family.A:
        raise ValueError("type A has no central symmetry")
    m = polygon_size(family, n)
    shift = m // 2
    if isinstance(x, Central):
        return Central((x.v + shift) % m, x.orient)
    return diagonal((x.a + shift) % m, (x.b + shift) % m)


def is_valid_element(x: Element, family: Family | str, n: int) -> bool:
    family = Family.parse(family)
    m = polygon_size(family, n)
    if isinstance(x, Central):
        return family is Family.D and 0 <= x.v < m
    if not (0 <= x.a < x.b < m):
        return False
    step = x.b - x.a
    if step in (1, m - 1):
        return False
    if family is Family.D and step == n:
        return False
    return True


def encode(elements: Iterable[Element]) -> str:
    """Canonical text encoding: element tokens sorted as strings, ``;``-joined."""
    return ";".join(sorted(e.token() for e in elements))


def parse_token(token: str) -> Element:
    if token.startswith("c"):
        return Central(int(token[1:-1]), Orient(token[-1]))
    a, b = token.split("-")
    return Diagonal(int(a), int(b))


def decode(text: str) -> list[Element]:
    if text == "":
        return []
    return [parse_token(t) for t in text.split(";")]


# ---------------------------------------------------------------------------
# Element universes
# ---------------------------------------------------------------------------

class Universe:
    """All elements of one family/size, with bit indices and crossing masks.

    Elements are indexed in the sorted order of their tokens.  ``orbit_of[i]``
    is the bitmask of the symmetry orbit of element ``i`` (the element alone
    in type A).
    """

    def __init__(self, family: Family | str, n: int):
        self.family = check_size(family, n)
        self.n = n
        self.m = polygon_size(self.family, n)
        elems: list[Element] = []
        for a in range(self.m):
            for b in range(a + 1, self.m):
                d = Diagonal(a, b)
                if is_valid_element(d, self.family, n):
                    elems.append(d)
        if self.family is Family.D:
            for v in range(self.m):
                elems.append(Central(v, Orient.CW))
                elems.append(Central(v, Orient.CCW))
        elems.sort(key=lambda e: e.token())
        self.elements: list[Element] = elems
        self.index = {e: i for i, e in enumerate(elems)}
        self.tokens = [e.token() for e in elems]
        size = len(elems)
        self.cross = [0] * size
        for i in range(size):
            for j in range(i + 1, size):
                if crosses(elems[i], elems[j], self.family, n):
                    self.cross[i] |= 1 << j
                    self.cross[j] |= 1 << i
        self.orbit_of = [0] * size
        for i, e in enumerate(elems):
            mask = 1 << i
            if self.family is not Family.A:
                mask |= 1 << self.index[antipodal_image(e, self.family, n)]
            self.orbit_of[i] = mask
        self.orbits = sorted(set(self.orbit_of))
        self.orbit_size = 1 if self.family is Family.A else 2
        # elements per triangulation
        self.triangulation_size = {
            Family.A: self.m - 3,
            Family.B: 2 * n - 1,
            Family.D: 2 * n,
        }[self.family]

    def mask(self, elements: Iterable[Element]) -> int:
        out = 0
        for e in elements:
            out |= 1 << self.index[e]
        return out

    def elements_of(self, mask: int) -> list[Element]:
        return [self.elements[i] for i in bits(mask)]

    def encode_mask(self, mask: int) -> str:
        return ";".join(sorted(self.tokens[i] for i in bits(mask)))

    def compatible(self, mask: int) -> bool:
        for i in bits(mask):
            if self.cross[i] & mask:
                return False
        return True

    def crossing_any(self, mask: int) -> int:
        out = 0
        for i in bits(mask):
            out |= self.cross[i]
        return out

    def is_maximal(self, mask: int) -> bool:
        blocked = self.crossing_any(mask) | mask
        return blocked == (1 << len(self.elements)) - 1


@lru_cache(maxsize=None)
def universe(family: Family | str, n: int) -> Universe:
    return Universe(Family.parse(family), n)


def bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


# ---------------------------------------------------------------------------
# Triangulations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CanonicalTriangulation:
    family: Family
    n: int
    elements: tuple

    @classmethod
    def from_elements(cls, family, n, elements: Iterable[Element]) -> "CanonicalTriangulation":
        family = Family.parse(family)
        return cls(family, n, tuple(sorted(elements, key=lambda e: e.token())))

    @classmethod
    def from_mask(cls, uni: Universe, mask: int) -> "CanonicalTriangulation":
        return cls.from_elements(uni.family, uni.n, uni.elements_of(mask))

    @classmethod
    def parse(cls, family, n, text: str) -> "CanonicalTriangulation":
        return cls.from_elements(family, n, decode(text))

    def encode(self) -> str:
        return encode(self.elements)

    def mask(self) -> int:
        return universe(self.family, self.n).mask(self.elements)

    def is_valid(self) -> bool:
        uni = universe(self.family, self.n)
        if any(not is_valid_element(e, self.family, self.n) for e in self.elements):
            return False
        mask = uni.mask(self.elements)
        if not uni.compatible(mask) or not uni.is_maximal(mask):
            return False
        if self.family is not Family.A:
            els = set(self.elements)
            if any(antipodal_image(e, self.family, self.n) not in els for e in els):
                return False
        return True


def _polygon_triangulation_masks(vertices: Sequence[int], uni: Universe) -> list[int]:
    """All triangulations of the convex polygon with the given boundary cycle,
    as masks of ``uni`` (diagonals between listed vertices)."""
    k = len(vertices)
    index = uni.index

    def dbit(i: int, j: int) -> int:
        return 1 << index[diagonal(vertices[i], vertices[j])]

    @lru_cache(maxsize=None)
    def tri(i: int, j: int) -> tuple:
        # triangulations of the sub-polygon vertices[i..j], edge (i, j) as base
        if j - i < 2:
            return (0,)
        out = []
        for apex in range(i + 1, j):
            left = tri(i, apex)
            right = tri(apex, j)
            extra = 0
            if apex - i >= 2:
                extra |= dbit(i, apex)
            if j - apex >= 2:
                extra |= dbit(apex, j)
            for lm in left:
                for rm in right:
                    out.append(lm | rm | extra)
        return tuple(out)

    return list(tri(0, k - 1))


def _mirror(mask: int, uni: Universe) -> int:
    out = mask
    for i in bits(mask):
        out |= uni.orbit_of[i]
    return out


def _enumerate_masks_D(uni: Universe) -> list[int]:
    """Maximal compatible sets of symmetric orbits, by backtracking."""
    orbits = uni.orbits
    cross_orbit = []
    for om in orbits:
        cross_orbit.append(uni.crossing_any(om))
    orbit_cross_idx = []
    for i, om in enumerate(orbits):
        blocked = 0
        for j, other in enumerate(orbits):
            if j != i and (cross_orbit[i] & other or other & cross_orbit[i]):
                blocked |= 1 << j
        self_ok = not (cross_orbit[i] & om)
        orbit_cross_idx.append((blocked, self_ok))
    k = len(orbits)
    results: list[int] = []
    initial = 0
    for j in range(k):
        if orbit_cross_idx[j][1]:
            initial |= 1 << j
    # canonical pruning: a set is only reported from its increasing listing,
    # and skipped orbits that remain addable make it non-maximal
    _extend_canonical(orbits, orbit_cross_idx, initial, results)
    return results


def _extend_canonical(orbits, orbit_cross_idx, initial, results):
    k = len(orbits)
    blockers = [orbit_cross_idx[j][0] for j in range(k)]

    def rec(j: int, chosen: int, allowed: int, skipped: int):
        # a skipped orbit that stays addable must be blocked by a later choice
        pending = skipped & allowed
        if pending:
            later = allowed & ~((1 << j) - 1)
            for s in bits(pending):
                if not blockers[s] & later:
                    return
        if j == k:
            mask = 0
            for t in bits(chosen):
                mask |= orbits[t]
            results.append(mask)
            return
        bit = 1 << j
        if allowed & bit:
            rec(j + 1, chosen | bit, allowed & ~blockers[j], skipped)
            rec(j + 1, chosen, allowed, skipped | bit)
        else:
            rec(j + 1, chosen, allowed, skipped)

    rec(0, 0, initial, 0)


def enumerate_masks(family: Family | str, n: int, cap: int | None = DEFAULT_ENUMERATION_CAP) -> list[int]:
    """Masks of all triangulations, sorted by canonical encoding."""
    family = check_size(family, n)
    expected = count_vertices(family, n)
    if cap is not None and expected > cap:
        raise EnumerationLimitError(
            f"type {family.value} n={n} has {expected} vertices, above the cap {cap}"
        )
    uni = universe(family, n)
    m = uni.m
    if family is Family.A:
        masks = _polygon_triangulation_masks(list(range(m)), uni)
    elif family is Family.B:
        masks = []
        half = n + 1
        for v in range(half):
            central = 1 << uni.index[diagonal(v, v + half)]
            side = [(v + i) % m for i in range(half + 1)]
            for sm in _polygon_triangulation_masks(side, uni):
                masks.append(_mirror(sm, uni) | central)
    else:
        masks = _enumerate_masks_D(uni)
    masks.sort(key=uni.encode_mask)
    return masks


def enumerate_triangulations(family: Family | str, n: int, cap: int | None = DEFAULT_ENUMERATION_CAP) -> list[CanonicalTriangulation]:
    family = Family.parse(family)
    uni = universe(family, n)
    return [CanonicalTriangulation.from_mask(uni, mk) for mk in enumerate_masks(family, n, cap)]


def pinwheel(n: int, orient: Orient = Orient.CW) -> CanonicalTriangulation:
    """The type-D triangulation made of all central chords of one orientation."""
    return CanonicalTriangulation.from_elements(Family.D, n, [Central(v, orient) for v in range(2 * n)])
