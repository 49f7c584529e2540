"""Tests for dyadic intervals, collections and Carleson packing."""

import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, settings, strategies as st
from dyrex.io import DyadicInterval, IntervalCollection
from dyrex.dyadic import (
    carleson_constant,
    carleson_constant_naive,
    maximal_members,
    measure,
    packing_sums,
    shadow,
    tree_packing_max,
    union_measure,
)

MAX_DEPTH = 5


@st.composite
def intervals(draw, max_level=MAX_DEPTH):
    """Draw a dyadic interval of level <= max_level."""
    level = draw(st.integers(0, max_level))
    return DyadicInterval(level, draw(st.integers(0, 2**level - 1)))


collections = st.lists(intervals(), min_size=1, max_size=20).map(IntervalCollection)


def brute_force_union(
    collection: IntervalCollection, depth: int = MAX_DEPTH
) -> Fraction:
    """Measure of the union by counting covered cells of the finest grid."""
    covered = set()
    for interval in collection:
        covered.update(interval.cells(depth))
    return Fraction(len(covered), 2**depth)


def test_interval():
    """Test the `DyadicInterval` arithmetic."""
    interval = DyadicInterval(2, 1)

    assert str(interval) == "2:1"
    assert DyadicInterval.from_str("2:1") == interval
    assert DyadicInterval.coerce((2, 1)) == interval
    assert interval.measure == Fraction(1, 4)
    assert (interval.start, interval.end) == (Fraction(1, 4), Fraction(1, 2))
    assert interval.left == DyadicInterval(3, 2)
    assert interval.right == DyadicInterval(3, 3)
    assert interval.parent == DyadicInterval(1, 0)
    assert interval.ancestors() == [DyadicInterval(1, 0), DyadicInterval(0, 0)]
    assert interval.bfs_index == 4
    assert DyadicInterval.from_bfs_index(4) == interval
    assert DyadicInterval(3, 3) in interval
    assert DyadicInterval(3, 4) not in interval
    assert list(interval.cells(3)) == [2, 3]

    with pytest.raises(ValueError):
        DyadicInterval(2, 4)
    with pytest.raises(ValueError):
        DyadicInterval(0, 0).parent
    with pytest.raises(ValueError):
        DyadicInterval.from_str("2-1")


def test_collection():
    """Test canonical order, membership and JSON of `IntervalCollection`."""
    collection = IntervalCollection(["2:3", "0:0", "2:3", (1, 1)])

    assert collection.to_list() == ["0:0", "1:1", "2:3"]
    assert DyadicInterval(1, 1) in collection
    assert DyadicInterval(1, 0) not in collection
    assert collection.depth == 2
    assert IntervalCollection.from_json(collection.to_json()) == collection
    assert len(IntervalCollection.all_intervals(3)) == 15
    within = IntervalCollection.level_intervals(2, within="1:1")
    assert within.to_list() == ["2:2", "2:3"]
    assert IntervalCollection.level_intervals(0, within="1:1").is_empty()


def test_shadow():
    """Test the truncated shadow Q(I)."""
    q = shadow(DyadicInterval(1, 0), 3)

    assert len(q) == 2 ** (3 - 1 + 1) - 1
    assert all(DyadicInterval(1, 0).contains(m) for m in q)
    assert measure(DyadicInterval(3, 0)) == Fraction(1, 8)

    with pytest.raises(ValueError, match="invalid-depth"):
        shadow(DyadicInterval(4, 0), 3)


def test_union_measure():
    """Test the measure of unions with nested and disjoint members."""
    collection = IntervalCollection(["1:0", "2:0", "2:3", "3:7"])

    assert maximal_members(collection) == [DyadicInterval(1, 0), DyadicInterval(2, 3)]
    assert union_measure(collection) == Fraction(3, 4)

    with pytest.raises(ValueError, match="empty-collection"):
        union_measure([])


def test_carleson_constant():
    """Test the Carleson constant on small hand computed collections."""
    chain = IntervalCollection(["0:0", "1:0", "2:0"])

    assert carleson_constant(chain) == Fraction(7, 4)
    assert carleson_constant(IntervalCollection.all_intervals(2)) == 3
    assert carleson_constant(["3:5"]) == 1
    assert packing_sums(chain)[DyadicInterval(1, 0)] == Fraction(3, 4)

    with pytest.raises(ValueError, match="empty-collection"):
        carleson_constant([])


@settings(max_examples=200, deadline=None)
@given(collections)
def test_carleson_oracle(collection):
    """The tree pass agrees exactly with the quadratic double loop."""
    assert carleson_constant(collection) == carleson_constant_naive(collection)


@settings(max_examples=200, deadline=None)
@given(collections)
def test_union_oracle(collection):
    """The union measure agrees exactly with counting grid cells."""
    assert union_measure(collection) == brute_force_union(collection)


@settings(max_examples=100, deadline=None)
@given(collections)
def test_carleson_bounds(collection):
    """Every non-empty collection has Carleson constant in [1, depth + 1]."""
    value = carleson_constant(collection)

    assert 1 <= value <= collection.depth + 1


def test_tree_packing_max():
    """The integer packing agrees with the exact constant for random subsets."""
    rng = np.random.default_rng(0)
    depth = 4
    n = 2 ** (depth + 1) - 1
    for _ in range(200):
        flags = (rng.random(n) < 0.4).tolist()
        if not any(flags):
            assert tree_packing_max(flags, depth) == 0
            continue
        members = [DyadicInterval.from_bfs_index(j) for j in range(n) if flags[j]]
        assert Fraction(tree_packing_max(flags, depth), 2**depth) == carleson_constant(
            members
        )
