"""Module containing data classes for dyadic intervals and interval collections."""

import json
import attrs
from bisect import bisect_left
from fractions import Fraction
from typing import Iterable, Iterator, Union


def _check_level_index(instance, attribute, value) -> None:
    """Validate that an index lies inside its dyadic level."""
    if instance.level < 0:
        raise ValueError(f"invalid-depth: level must be >= 0, found {instance.level}")
    if not 0 <= instance.index < 2**instance.level:
        raise ValueError(
            f"index {instance.index} out of range for level {instance.level}"
        )


@attrs.frozen(order=True)
class DyadicInterval:
    """Node `(level, index)` of the binary tree over [0, 1).

    Represents the half open interval `[index * 2^-level, (index + 1) * 2^-level)`.
    Ordering is by `(level, index)`, the canonical order used for collections.

    Attributes:
        level: the dyadic level k (length 2^-k).
        index: the position i inside level k, `0 <= i < 2^k`.
    """

    level: int = attrs.field(converter=int)
    index: int = attrs.field(converter=int, validator=_check_level_index)

    def __str__(self) -> str:
        """Return the canonical text form `"k:i"`."""
        return f"{self.level}:{self.index}"

    @classmethod
    def from_str(cls, text: str) -> "DyadicInterval":
        """Parse the canonical text form `"k:i"`.

        Args:
            text: a string like `"3:5"`.

        Returns:
            The corresponding `DyadicInterval`.
        """
        try:
            level, index = text.strip().split(":")
        except ValueError:
            raise ValueError(f"Could not parse dyadic interval from '{text}'")
        return cls(int(level), int(index))

    @classmethod
    def coerce(cls, interval: Union["DyadicInterval", str, tuple]) -> "DyadicInterval":
        """Convert a string or `(level, index)` tuple to a `DyadicInterval`."""
        if isinstance(interval, DyadicInterval):
            return interval
        if isinstance(interval, str):
            return cls.from_str(interval)
        return cls(*interval)

    @property
    def measure(self) -> Fraction:
        """Exact Lebesgue measure 2^-level."""
        return Fraction(1, 2**self.level)

    @property
    def start(self) -> Fraction:
        """Left endpoint as an exact fraction."""
        return Fraction(self.index, 2**self.level)

    @property
    def end(self) -> Fraction:
        """Right endpoint as an exact fraction."""
        return Fraction(self.index + 1, 2**self.level)

    @property
    def left(self) -> "DyadicInterval":
        """Left child `(k + 1, 2i)`."""
        return DyadicInterval(self.level + 1, 2 * self.index)

    @property
    def right(self) -> "DyadicInterval":
        """Right child `(k + 1, 2i + 1)`."""
        return DyadicInterval(self.level + 1, 2 * self.index + 1)

    @property
    def parent(self) -> "DyadicInterval":
        """Parent `(k - 1, i // 2)`; undefined for the unit interval."""
        if self.level == 0:
            raise ValueError("The unit interval has no parent")
        return DyadicInterval(self.level - 1, self.index // 2)

    @property
    def bfs_index(self) -> int:
        """Position of the interval in breadth-first order `2^k - 1 + i`."""
        return 2**self.level - 1 + self.index

    @classmethod
    def from_bfs_index(cls, position: int) -> "DyadicInterval":
        """Inverse of `bfs_index`."""
        level = (position + 1).bit_length() - 1
        return cls(level, position + 1 - 2**level)

    def ancestor(self, level: int) -> "DyadicInterval":
        """Get the unique dyadic interval of `level` containing this one."""
        if level > self.level:
            raise ValueError(f"invalid-depth: no ancestor at level {level} of {self}")
        return DyadicInterval(level, self.index >> (self.level - level))

    def ancestors(self) -> list["DyadicInterval"]:
        """Get all strict ancestors, nearest first."""
        return [self.ancestor(k) for k in range(self.level - 1, -1, -1)]

    def contains(self, other: "DyadicInterval") -> bool:
        """Test `other ⊆ self`."""
        return (
            other.level >= self.level
            and other.index >> (other.level - self.level) == self.index
        )

    def __contains__(self, other: "DyadicInterval") -> bool:
        """Alias of `contains` so `J in I` reads as inclusion."""
        return self.contains(other)

    def shift(self, offset: int) -> "DyadicInterval":
        """Translate by `offset` intervals of the same level."""
        return DyadicInterval(self.level, self.index + offset)

    def cells(self, depth: int) -> range:
        """Get the indices of the level-`depth` grid cells covering the interval.

        Args:
            depth: resolution of the grid (cells of length 2^-depth).

        Returns:
            A range of cell indices.
        """
        if depth < self.level:
            raise ValueError(
                f"invalid-depth: grid level {depth} coarser than interval {self}"
            )
        width = 2 ** (depth - self.level)
        return range(self.index * width, (self.index + 1) * width)

    def subintervals(self, level: int) -> list["DyadicInterval"]:
        """Get the dyadic subintervals of `level` inside this interval."""
        return [DyadicInterval(level, i) for i in self.cells(level)]


def _to_members(members: Iterable) -> tuple[DyadicInterval, ...]:
    """Convert an iterable of interval-likes into a sorted, duplicate free tuple."""
    return tuple(sorted({DyadicInterval.coerce(m) for m in members}))


@attrs.frozen
class IntervalCollection:
    """Finite set of dyadic intervals stored in canonical `(level, index)` order.

    Attributes:
        members: sorted tuple of distinct `DyadicInterval`s.
    """

    members: tuple[DyadicInterval, ...] = attrs.field(
        factory=tuple, converter=_to_members
    )

    def __len__(self) -> int:
        """Get the number of intervals."""
        return len(self.members)

    def __iter__(self) -> Iterator[DyadicInterval]:
        """Iterate in canonical order."""
        return iter(self.members)

    def __contains__(self, interval: DyadicInterval) -> bool:
        """Binary search membership test."""
        pos = bisect_left(self.members, interval)
        return pos < len(self.members) and self.members[pos] == interval

    def __repr__(self) -> str:
        """Get the string representation of the collection."""
        return f"IntervalCollection([{', '.join(str(m) for m in self.members)}])"

    @property
    def depth(self) -> int:
        """Maximal level present (-1 for the empty collection)."""
        return max((m.level for m in self.members), default=-1)

    def is_empty(self) -> bool:
        """Check whether the collection has no members."""
        return len(self.members) == 0

    def union(self, other: "IntervalCollection") -> "IntervalCollection":
        """Set union with another collection."""
        return IntervalCollection(self.members + other.members)

    def key(self) -> tuple[tuple[int, int], ...]:
        """Canonical sort key used to break ties between witnesses."""
        return tuple((m.level, m.index) for m in self.members)

    def to_list(self) -> list[str]:
        """Convert to a list of `"k:i"` strings."""
        return [str(m) for m in self.members]

    def to_json(self) -> str:
        """Serialize as a JSON array of `"k:i"` strings."""
        return json.dumps(self.to_list())

    @classmethod
    def from_json(cls, text: str) -> "IntervalCollection":
        """Parse a JSON array of `"k:i"` strings."""
        return cls(json.loads(text))

    @classmethod
    def all_intervals(cls, depth: int) -> "IntervalCollection":
        """Get D_0^N, every dyadic interval of level at most `depth`."""
        if depth < 0:
            raise ValueError(f"invalid-depth: depth must be >= 0, found {depth}")
        return cls(
            DyadicInterval(k, i) for k in range(depth + 1) for i in range(2**k)
        )

    @classmethod
    def level_intervals(
        cls, level: int, within: Union[DyadicInterval, str, None] = None
    ) -> "IntervalCollection":
        """Get the intervals of one level, optionally only those inside `within`."""
        if within is None:
            return cls(DyadicInterval(level, i) for i in range(2**level))
        within = DyadicInterval.coerce(within)
        if level < within.level:
            return cls()
        return cls(within.subintervals(level))
