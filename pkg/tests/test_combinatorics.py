from __future__ import annotations

import itertools
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from genassoc.combinatorics import (
    CanonicalTriangulation,
    Central,
    Diagonal,
    EnumerationLimitError,
    Family,
    Orient,
    antipodal_image,
    catalan,
    catalan_closed_form,
    check_size,
    count_vertices,
    crosses,
    decode,
    encode,
    enumerate_masks,
    enumerate_triangulations,
    pinwheel,
    universe,
)


def brute_force_count(family, n):
    """Count maximal, centrally symmetric, pairwise non-crossing subsets."""
    uni = universe(family, n)
    elems = uni.elements
    size = len(elems)
    count = 0
    for r in range(size + 1):
        for combo in itertools.combinations(range(size), r):
            mask = sum(1 << i for i in combo)
            if not uni.compatible(mask) or not uni.is_maximal(mask):
                continue
            if family is not Family.A:
                image = {uni.index[antipodal_image(elems[i], family, n)] for i in combo}
                if image != set(combo):
                    continue
            count += 1
    return count


@pytest.mark.parametrize("k,value", [(0, 1), (1, 1), (4, 14), (9, 4862)])
def test_catalan_values(k, value):
    assert catalan(k) == value


@given(st.integers(min_value=0, max_value=60))
def test_catalan_recurrence_and_closed_form(k):
    assert catalan(k) == catalan_closed_form(k)
    if k:
        assert catalan(k) == sum(catalan(i) * catalan(k - 1 - i) for i in range(k))


@pytest.mark.parametrize("family,n,value", [("A", 3, 14), ("B", 3, 20), ("D", 3, 14), ("D", 4, 50)])
def test_count_examples(family, n, value):
    assert count_vertices(family, n) == value


@given(st.integers(min_value=3, max_value=30))
def test_count_formulas(n):
    assert count_vertices("A", n) == catalan(n + 1)
    assert count_vertices("B", n) == comb(2 * n, n)
    assert count_vertices("D", n) * n == (3 * n - 2) * comb(2 * n - 2, n - 1)


@pytest.mark.parametrize("family,n", [("A", 2), ("A", 3), ("A", 4), ("B", 2), ("B", 3), ("D", 3)])
def test_enumeration_matches_brute_force(family, n):
    fam = Family.parse(family)
    assert len(enumerate_masks(fam, n)) == brute_force_count(fam, n) == count_vertices(fam, n)


def test_crossing_examples():
    assert crosses(Diagonal(0, 2), Diagonal(1, 3), "A", 1)
    assert not crosses(Central(0, Orient.CW), Central(0, Orient.CCW), "D", 3)
    assert crosses(Central(0, Orient.CW), Central(1, Orient.CCW), "D", 3)
    assert not crosses(Central(0, Orient.CW), Central(3, Orient.CCW), "D", 3)
    assert not crosses(Central(0, Orient.CW), Central(4, Orient.CW), "D", 3)
    # a diagonal blocks chords from the vertices its minor arc hides
    assert crosses(Diagonal(0, 2), Central(1, Orient.CW), "D", 3)
    assert not crosses(Diagonal(0, 2), Central(4, Orient.CCW), "D", 3)


@given(st.integers(min_value=3, max_value=7), st.data())
def test_crossing_is_symmetric(n, data):
    uni = universe("D", n)
    x = data.draw(st.sampled_from(uni.elements))
    y = data.draw(st.sampled_from(uni.elements))
    assert crosses(x, y, "D", n) == crosses(y, x, "D", n)


def test_antipodal_examples():
    assert antipodal_image(Diagonal(1, 4), "B", 3) == Diagonal(0, 5)
    assert antipodal_image(Central(2, Orient.CCW), "D", 3) == Central(5, Orient.CCW)


@given(st.sampled_from(["B", "D"]), st.integers(min_value=3, max_value=8), st.data())
def test_antipodal_is_involution(family, n, data):
    x = data.draw(st.sampled_from(universe(family, n).elements))
    assert antipodal_image(antipodal_image(x, family, n), family, n) == x


def test_encoding_examples():
    assert CanonicalTriangulation.from_elements("A", 1, [Diagonal(0, 2)]).encode() == "0-2"
    t = CanonicalTriangulation.from_elements("B", 3, [Diagonal(0, 4), Diagonal(1, 4), Diagonal(0, 5)])
    assert t.encode() == "0-4;0-5;1-4"
    assert pinwheel(3).encode() == "c0+;c1+;c2+;c3+;c4+;c5+"


def test_enumeration_examples():
    assert [t.encode() for t in enumerate_triangulations("A", 1)] == ["0-2", "1-3"]
    assert len(enumerate_triangulations("B", 2)) == 6
    d3 = enumerate_triangulations("D", 3)
    assert len(d3) == 14
    assert pinwheel(3) in d3 and pinwheel(3, Orient.CCW) in d3
    assert all(t.is_valid() for t in d3)


@given(st.sampled_from([("A", 4), ("B", 3), ("D", 4)]), st.data())
def test_encoding_round_trip(fn, data):
    family, n = fn
    t = data.draw(st.sampled_from(enumerate_triangulations(family, n)))
    assert CanonicalTriangulation.parse(family, n, t.encode()) == t
    assert encode(decode(t.encode())) == t.encode()


@pytest.mark.parametrize("family,n", [("A", 5), ("B", 4), ("D", 4)])
def test_encodings_are_injective_and_sorted(family, n):
    enc = [t.encode() for t in enumerate_triangulations(family, n)]
    assert enc == sorted(set(enc))


def test_size_guards():
    with pytest.raises(ValueError):
        check_size("D", 2)
    with pytest.raises(ValueError):
        check_size("B", 1)
    with pytest.raises(ValueError):
        check_size("Q", 3)
    with pytest.raises(EnumerationLimitError):
        enumerate_masks("A", 10, cap=100)
