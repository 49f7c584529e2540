"""Module containing the coefficient space X."""

import math
import attrs
import torch
from typing import Union

DTYPE = torch.float64


def _to_exponent(value: Union[float, str]) -> float:
    """Convert an exponent, accepting `"inf"` for the max-norm."""
    value = float(value)
    if value < 1:
        raise ValueError(f"invalid-exponent: sequence space exponent {value} < 1")
    return value


@attrs.frozen
class SpaceSpec:
    """The Banach space X in which Haar coefficients live.

    Either the scalars or the sequence space ℓ_r^d. Scalars are ℓ_r^1 for any r.

    Attributes:
        kind: `"scalar"` or `"lp"`.
        r: the exponent of ℓ_r^d in [1, ∞].
        d: the dimension.
    """

    kind: str = attrs.field(default="scalar", validator=attrs.validators.in_(["scalar", "lp"]))
    r: float = attrs.field(default=2.0, converter=_to_exponent)
    d: int = attrs.field(default=1, converter=int)

    def __attrs_post_init__(self) -> None:
        """Check dimension consistency."""
        if self.d < 1:
            raise ValueError(f"Dimension of X must be >= 1, found {self.d}")
        if self.kind == "scalar" and self.d != 1:
            raise ValueError(f"Scalar space must have d = 1, found {self.d}")

    def __str__(self) -> str:
        """Get the short form used in the CLI, e.g. `lp:1.2:16`."""
        if self.kind == "scalar":
            return "scalar"
        return f"lp:{self.r:g}:{self.d}"

    @classmethod
    def scalar(cls) -> "SpaceSpec":
        """Get the one dimensional space of real scalars."""
        return cls("scalar", 2.0, 1)

    @classmethod
    def lp(cls, r: float, d: int) -> "SpaceSpec":
        """Get ℓ_r^d."""
        return cls("lp", r, d)

    @classmethod
    def parse(cls, text: str) -> "SpaceSpec":
        """Parse `scalar` or `lp:<r>:<d>`.

        Args:
            text: the short form.

        Returns:
            The parsed `SpaceSpec`.
        """
        if text.strip() == "scalar":
            return cls.scalar()
        try:
            kind, r, d = text.strip().split(":")
        except ValueError:
            raise ValueError(f"Could not parse space from '{text}'")
        if kind != "lp":
            raise ValueError(f"Unknown space kind '{kind}' in '{text}'")
        return cls.lp(float(r), int(d))

    @property
    def is_hilbert(self) -> bool:
        """True for the scalars and ℓ_2^d."""
        return self.d == 1 or self.r == 2.0

    def norm(self, values: torch.Tensor) -> torch.Tensor:
        """Evaluate ‖·‖_X along the last dimension.

        Args:
            values: tensor of shape (..., d).

        Returns:
            Tensor of shape (...) with the vector norms.
        """
        if values.shape[-1] != self.d:
            raise ValueError(
                f"Expected vectors of dimension {self.d}, found {values.shape[-1]}"
            )
        if self.d == 1:
            return values[..., 0].abs()
        return torch.linalg.vector_norm(values, ord=self.r, dim=-1)

    def to_dict(self) -> dict:
        """Convert to the JSON layout used by expansions."""
        return {"kind": self.kind, "r": None if math.isinf(self.r) else self.r, "d": self.d}

    @classmethod
    def from_dict(cls, data: dict) -> "SpaceSpec":
        """Inverse of `to_dict`."""
        r = data.get("r")
        return cls(data.get("kind", "scalar"), math.inf if r is None else r, data.get("d", 1))
