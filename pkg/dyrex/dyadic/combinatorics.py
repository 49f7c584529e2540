"""Exact measure theory and Carleson packing of dyadic interval collections."""

from fractions import Fraction
from typing import Iterable, Sequence, Union
from dyrex.io.interval import DyadicInterval, IntervalCollection


def _as_collection(
    collection: Union[IntervalCollection, Iterable[DyadicInterval]]
) -> IntervalCollection:
    """Wrap plain iterables into an `IntervalCollection`."""
    if isinstance(collection, IntervalCollection):
        return collection
    return IntervalCollection(collection)


def measure(interval: DyadicInterval) -> Fraction:
    """Get the exact measure 2^-level of a dyadic interval.

    Args:
        interval: the dyadic interval.

    Returns:
        The measure as a `Fraction`.
    """
    return DyadicInterval.coerce(interval).measure


def shadow(interval: DyadicInterval, depth: int) -> IntervalCollection:
    """Get Q(I) truncated to D_0^N, i.e. all dyadic J ⊆ I with level(J) <= N.

    Args:
        interval: the root interval I.
        depth: the truncation depth N.

    Returns:
        A collection with 2^(N - k + 1) - 1 members for I at level k.
    """
    interval = DyadicInterval.coerce(interval)
    if interval.level > depth:
        raise ValueError(
            f"invalid-depth: interval {interval} lies below truncation depth {depth}"
        )
    return IntervalCollection(
        sub
        for level in range(interval.level, depth + 1)
        for sub in interval.subintervals(level)
    )


def maximal_members(
    collection: Union[IntervalCollection, Iterable[DyadicInterval]]
) -> list[DyadicInterval]:
    """Get the members that are not contained in any other member.

    Args:
        collection: a collection of dyadic intervals.

    Returns:
        The maximal members in canonical order; they are pairwise disjoint.
    """
    collection = _as_collection(collection)
    members = set(collection)
    return [
        m for m in collection if not any(a in members for a in m.ancestors())
    ]


def union_measure(
    collection: Union[IntervalCollection, Iterable[DyadicInterval]]
) -> Fraction:
    """Get |C*|, the exact measure of the union of a non-empty collection.

    Args:
        collection: a non-empty collection of dyadic intervals.

    Returns:
        The measure of the union as a `Fraction`.
    """
    collection = _as_collection(collection)
    if collection.is_empty():
        raise ValueError("empty-collection: union measure needs a non-empty collection")
    return sum((m.measure for m in maximal_members(collection)), Fraction(0))


def packing_sums(
    collection: Union[IntervalCollection, Iterable[DyadicInterval]]
) -> dict[DyadicInterval, Fraction]:
    """Get Σ_{J ⊆ I, J ∈ E} |J| for every member I with one bottom-up tree pass.

    Partial sums travel from each node to its parent, so only members and their
    ancestors are ever visited.

    Args:
        collection: the collection E.

    Returns:
        A dict mapping each member I to its packed measure.
    """
    collection = _as_collection(collection)
    members = set(collection)
    acc: dict[DyadicInterval, Fraction] = {}
    for level in range(collection.depth, -1, -1):
        nodes = [node for node in acc if node.level == level]
        nodes += [m for m in members if m.level == level and m not in acc]
        for node in nodes:
            total = acc.get(node, Fraction(0))
            if node in members:
                total += node.measure
            acc[node] = total
            if level > 0 and total:
                parent = node.parent
                acc[parent] = acc.get(parent, Fraction(0)) + total
    return {m: acc[m] for m in collection}


def carleson_constant(
    collection: Union[IntervalCollection, Iterable[DyadicInterval]]
) -> Fraction:
    """Get the Carleson constant sup_{I ∈ E} |I|^-1 Σ_{J ⊆ I, J ∈ E} |J|.

    Args:
        collection: a non-empty collection E.

    Returns:
        The exact Carleson constant (always >= 1).
    """
    collection = _as_collection(collection)
    if collection.is_empty():
        raise ValueError("empty-collection: Carleson constant of an empty collection")
    sums = packing_sums(collection)
    return max(total / interval.measure for interval, total in sums.items())


def carleson_constant_naive(
    collection: Union[IntervalCollection, Iterable[DyadicInterval]]
) -> Fraction:
    """Quadratic double loop version of `carleson_constant`, used as an oracle."""
    collection = _as_collection(collection)
    if collection.is_empty():
        raise ValueError("empty-collection: Carleson constant of an empty collection")
    best = Fraction(0)
    for outer in collection:
        total = sum((inner.measure for inner in collection if outer.contains(inner)), Fraction(0))
        best = max(best, total / outer.measure)
    return best


def cell_mask(interval: DyadicInterval, depth: int) -> int:
    """Encode the grid cells of level `depth` covered by `interval` as a bitmask.

    Args:
        interval: the dyadic interval.
        depth: resolution of the grid.

    Returns:
        An integer whose bit c is set iff cell c lies in the interval.
    """
    cells = interval.cells(depth)
    return ((1 << len(cells)) - 1) << cells.start


def tree_packing_max(flags: Sequence[bool], depth: int) -> int:
    """Integer Carleson numerator of a subset of D_0^N given by membership flags.

    `flags` is indexed in breadth-first order. Measures are counted in units of
    2^-depth, so the Carleson constant of the subset equals the returned value
    divided by 2^depth.

    Args:
        flags: membership flag for every interval of D_0^N in breadth-first order.
        depth: the depth N.

    Returns:
        max over members I of 2^level(I) * Σ_{J ⊆ I, J member} 2^(depth - level(J)),
        or 0 if no flag is set.
    """
    n = 2 ** (depth + 1) - 1
    sums = [0] * n
    best = 0
    for pos in range(n - 1, -1, -1):
        level = (pos + 1).bit_length() - 1
        total = sums[pos]
        if flags[pos]:
            total += 1 << (depth - level)
            best = max(best, total << level)
        if pos:
            sums[(pos - 1) // 2] += total
    return best
