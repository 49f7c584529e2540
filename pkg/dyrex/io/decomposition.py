"""Module containing decompositions for condition C and adapted sequences."""

import json
import math
import attrs
import torch
from pathlib import Path
from typing import Union
from dyrex.io.interval import DyadicInterval, IntervalCollection
from dyrex.io.space_spec import DTYPE


def _to_parts(parts) -> tuple[IntervalCollection, ...]:
    """Convert nested lists of `"k:i"` strings into collections."""
    return tuple(
        p if isinstance(p, IntervalCollection) else IntervalCollection(p) for p in parts
    )


@attrs.frozen
class CDecomposition:
    """Partition {K_i} of the intervals below a root J_0 with the exponents of condition C.

    Attributes:
        root: J_0.
        parts: the collections K_i.
        p: the L^p exponent.
        p_star: the higher exponent p_* >= p.
        kappa: the constant κ.
    """

    root: DyadicInterval = attrs.field(converter=DyadicInterval.coerce)
    parts: tuple[IntervalCollection, ...] = attrs.field(converter=_to_parts)
    p: float = attrs.field(default=2.0, converter=float)
    p_star: float = attrs.field(default=2.0, converter=float)
    kappa: float = attrs.field(default=1.0, converter=float)

    def __attrs_post_init__(self) -> None:
        """Check the exponents."""
        if self.p <= 1:
            raise ValueError(f"invalid-exponents: p must be > 1, found {self.p}")
        if not self.p <= self.p_star < math.inf:
            raise ValueError(
                f"invalid-exponents: p_star must lie in [p, inf), found {self.p_star}"
            )

    @property
    def q_star(self) -> float:
        """Conjugate exponent of p_*."""
        return self.p_star / (self.p_star - 1)

    def check_partition(self, depth: int) -> None:
        """Check that the parts partition {I ∈ D_0^N : I ⊆ J_0}.

        Args:
            depth: the truncation depth N.

        Raises:
            ValueError: `invalid-decomposition` naming the first defect.
        """
        from dyrex.dyadic import shadow

        if self.root.level > depth:
            raise ValueError(
                f"invalid-decomposition: root {self.root} deeper than depth {depth}"
            )
        target = set(shadow(self.root, depth))
        seen: set[DyadicInterval] = set()
        for i, part in enumerate(self.parts):
            if part.is_empty():
                raise ValueError(f"invalid-decomposition: part {i} is empty")
            for interval in part:
                if interval in seen:
                    raise ValueError(
                        f"invalid-decomposition: {interval} belongs to two parts"
                    )
                if interval not in target:
                    raise ValueError(
                        f"invalid-decomposition: {interval} is not inside root "
                        f"{self.root} at depth {depth}"
                    )
                seen.add(interval)
        missing = sorted(target - seen)
        if missing:
            raise ValueError(f"invalid-decomposition: {missing[0]} is not covered")

    def to_dict(self) -> dict:
        """Convert to the decomposition file layout."""
        return {
            "root": str(self.root),
            "parts": [part.to_list() for part in self.parts],
            "p": self.p,
            "p_star": self.p_star,
            "kappa": self.kappa,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CDecomposition":
        """Inverse of `to_dict`."""
        return cls(
            data["root"],
            data["parts"],
            p=data.get("p", 2.0),
            p_star=data.get("p_star", data.get("p", 2.0)),
            kappa=data.get("kappa", 1.0),
        )

    @classmethod
    def from_json(cls, text_or_path: Union[str, Path]) -> "CDecomposition":
        """Parse JSON text or a JSON file path."""
        text = str(text_or_path)
        if not text.lstrip().startswith("{"):
            text = Path(text_or_path).read_text()
        return cls.from_dict(json.loads(text))


def _to_levels(levels) -> torch.Tensor:
    """Stack level values Z_0..Z_n into one (n + 1, 2^n) tensor."""
    if isinstance(levels, torch.Tensor):
        return levels.to(DTYPE)
    levels = [torch.as_tensor(z, dtype=DTYPE).flatten() for z in levels]
    n = len(levels) - 1
    return torch.stack(
        [z.repeat_interleave(2**n // z.numel()) for z in levels]
    )


@attrs.define(eq=False)
class AdaptedSequence:
    """Nonnegative nondecreasing adapted sequence Z_0 <= ... <= Z_n.

    Attributes:
        values: tensor of shape (n + 1, 2^n); row k is Z_k on the level-n grid and
            is constant on every interval of level k.
    """

    values: torch.Tensor = attrs.field(converter=_to_levels)

    def __attrs_post_init__(self) -> None:
        """Check adaptedness, sign and monotonicity."""
        rows, cells = self.values.shape
        if cells != 2 ** (rows - 1):
            raise ValueError(
                f"invalid-sequence: {rows} levels need {2 ** (rows - 1)} cells, "
                f"found {cells}"
            )
        for k in range(rows):
            block = self.values[k].reshape(2**k, -1)
            if not torch.all(block == block[:, :1]):
                raise ValueError(f"invalid-sequence: Z_{k} is not constant on D_{k}")
        if torch.any(self.values < 0):
            raise ValueError("invalid-sequence: values must be nonnegative")
        if torch.any(self.values[1:] < self.values[:-1]):
            raise ValueError("invalid-sequence: sequence is not nondecreasing")

    @property
    def depth(self) -> int:
        """Get n."""
        return self.values.shape[0] - 1

    def level(self, k: int) -> torch.Tensor:
        """Get Z_k as its 2^k level values."""
        return self.values[k].reshape(2**k, -1)[:, 0]

    @classmethod
    def random(
        cls, depth: int, generator: torch.Generator = None, scale: float = 1.0
    ) -> "AdaptedSequence":
        """Draw a random sequence Z_k = Z_{k-1} + Δ_k with adapted Δ_k >= 0.

        Some increments are set to zero so that flat stretches occur.

        Args:
            depth: n.
            generator: torch random generator.
            scale: scale of the exponential increments.

        Returns:
            The random sequence.
        """
        cells = 2**depth
        rows = []
        current = torch.zeros(cells, dtype=DTYPE)
        for k in range(depth + 1):
            inc = torch.empty(2**k, dtype=DTYPE).exponential_(generator=generator)
            keep = torch.rand(2**k, generator=generator, dtype=DTYPE) < 0.7
            inc = scale * inc * keep
            current = current + inc.repeat_interleave(cells // 2**k)
            rows.append(current.clone())
        return cls(torch.stack(rows))
