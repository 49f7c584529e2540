"""Module containing the data class for injective maps between dyadic intervals."""

import json
import attrs
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Union
from dyrex.io.interval import DyadicInterval, IntervalCollection


def _to_table(table: dict) -> dict[DyadicInterval, DyadicInterval]:
    """Coerce keys and values of a table into `DyadicInterval`s."""
    return {
        DyadicInterval.coerce(k): DyadicInterval.coerce(v) for k, v in table.items()
    }


@attrs.frozen(eq=False)
class RearrangementMap:
    """Injective map τ: D_0^N → D_0^L stored as an explicit table.

    Attributes:
        source_depth: N, every interval of level <= N is in the domain.
        target_depth: L, every image has level <= L.
        table: mapping from source interval to its image.
    """

    source_depth: int = attrs.field(converter=int)
    target_depth: int = attrs.field(converter=int)
    table: dict[DyadicInterval, DyadicInterval] = attrs.field(converter=_to_table)

    def __attrs_post_init__(self) -> None:
        """Check that the table is an injection defined on all of D_0^N."""
        if self.source_depth < 0 or self.target_depth < 0:
            raise ValueError(
                f"invalid-depth: depths must be >= 0, found "
                f"({self.source_depth}, {self.target_depth})"
            )
        expected = 2 ** (self.source_depth + 1) - 1
        if len(self.table) != expected or any(
            k.level > self.source_depth for k in self.table
        ):
            raise ValueError(
                f"domain-mismatch: table must cover exactly D_0^{self.source_depth} "
                f"({expected} intervals), found {len(self.table)} entries"
            )
        too_deep = [v for v in self.table.values() if v.level > self.target_depth]
        if too_deep:
            raise ValueError(
                f"invalid-depth: image {too_deep[0]} deeper than target depth "
                f"{self.target_depth}"
            )
        if len(set(self.table.values())) != len(self.table):
            raise ValueError("domain-mismatch: map is not injective")

    def __repr__(self) -> str:
        """Get the string representation of the map."""
        return (
            f"RearrangementMap(source_depth={self.source_depth}, "
            f"target_depth={self.target_depth}, "
            f"measure_preserving={self.measure_preserving})"
        )

    def __call__(self, interval: Union[DyadicInterval, str]) -> DyadicInterval:
        """Get τ(I)."""
        return self.table[DyadicInterval.coerce(interval)]

    def __eq__(self, other: object) -> bool:
        """Maps are equal when depths and tables agree."""
        if not isinstance(other, RearrangementMap):
            return NotImplemented
        return (
            self.source_depth == other.source_depth
            and self.target_depth == other.target_depth
            and self.table == other.table
        )

    def __len__(self) -> int:
        """Get the size of the domain."""
        return len(self.table)

    @property
    def measure_preserving(self) -> bool:
        """True iff |τ(I)| = |I| for every I."""
        return all(k.level == v.level for k, v in self.table.items())

    @property
    def is_bijective(self) -> bool:
        """True iff τ permutes D_0^N."""
        return all(v.level <= self.source_depth for v in self.table.values())

    def gamma(self, interval: DyadicInterval) -> Fraction:
        """Get γ_I = |I| / |τ(I)|, an exact power of two."""
        interval = DyadicInterval.coerce(interval)
        return interval.measure / self.table[interval].measure

    def sources(self) -> list[DyadicInterval]:
        """Get the domain in canonical order."""
        return sorted(self.table)

    def image(
        self, collection: Union[IntervalCollection, Iterable[DyadicInterval]]
    ) -> IntervalCollection:
        """Get τ(C) for a collection C of source intervals."""
        return IntervalCollection(self.table[DyadicInterval.coerce(m)] for m in collection)

    def inverse(self) -> "RearrangementMap":
        """Get τ^-1 for a bijective map."""
        if not self.is_bijective:
            raise ValueError("domain-mismatch: only bijective maps can be inverted")
        return RearrangementMap(
            self.source_depth,
            self.source_depth,
            {v: k for k, v in self.table.items()},
        )

    def compose(self, other: "RearrangementMap") -> "RearrangementMap":
        """Get `self ∘ other`, i.e. I ↦ self(other(I))."""
        if other.target_depth > self.source_depth:
            raise ValueError(
                f"domain-mismatch: cannot compose, images of depth {other.target_depth} "
                f"are outside the domain D_0^{self.source_depth}"
            )
        return RearrangementMap(
            other.source_depth,
            self.target_depth,
            {k: self.table[v] for k, v in other.table.items()},
        )

    def to_dict(self) -> dict:
        """Convert to the permutation file layout.

        Identity pairs are omitted since omitted sources default to the identity.
        """
        return {
            "source_depth": self.source_depth,
            "target_depth": self.target_depth,
            "pairs": [
                [str(k), str(self.table[k])]
                for k in self.sources()
                if self.table[k] != k
            ],
        }

    def to_json(self, path: Union[str, Path, None] = None) -> str:
        """Serialize to JSON and optionally save it.

        Args:
            path: optional file path to write to.

        Returns:
            The JSON text.
        """
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_dict(cls, data: dict) -> "RearrangementMap":
        """Build a map from the permutation file layout."""
        source_depth = int(data["source_depth"])
        target_depth = int(data.get("target_depth", source_depth))
        table = {
            DyadicInterval(k, i): DyadicInterval(k, i)
            for k in range(source_depth + 1)
            for i in range(2**k)
        }
        for source, target in data.get("pairs", []):
            table[DyadicInterval.coerce(source)] = DyadicInterval.coerce(target)
        return cls(source_depth, target_depth, table)

    @classmethod
    def from_json(cls, text_or_path: Union[str, Path]) -> "RearrangementMap":
        """Parse a map from JSON text or from a JSON file path."""
        text = str(text_or_path)
        if not text.lstrip().startswith("{"):
            text = Path(text_or_path).read_text()
        return cls.from_dict(json.loads(text))
