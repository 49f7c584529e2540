"""Module containing data classes for Haar expansions, stopping times and atoms."""

import json
import math
import attrs
import torch
import numpy as np
import pandas as pd
from numpy.typing import ArrayLike
from pathlib import Path
from typing import Union
from dyrex.io.interval import DyadicInterval
from dyrex.io.space_spec import SpaceSpec, DTYPE


def _to_tensor(data: Union[float, ArrayLike, None]) -> torch.Tensor:
    """Convert data to a float64 torch.Tensor.

    Args:
        data: Either a scalar quantity or arraylike object

    Returns:
        A torch Tensor containing data.
    """
    if data is None:
        return torch.tensor([], dtype=DTYPE)
    if isinstance(data, torch.Tensor):
        return data.to(DTYPE)
    elif np.isscalar(data):
        return torch.tensor([data], dtype=DTYPE)
    else:
        return torch.tensor(np.asarray(data, dtype=np.float64), dtype=DTYPE)


@attrs.define(eq=False)
class HaarExpansion:
    """Finite Haar expansion mean + Σ_{I ∈ D_0^N} a_I h_I with a_I ∈ X.

    Attributes:
        depth: N, the deepest level carrying a coefficient.
        space: the coefficient space X.
        mean: the mean value, a tensor of shape (d,).
        coeffs: a tensor of shape (2^(N+1) - 1, d) in breadth-first order.
    """

    depth: int = attrs.field(converter=int)
    space: SpaceSpec = attrs.field(factory=SpaceSpec.scalar)
    mean: torch.Tensor = attrs.field(default=None, converter=_to_tensor)
    coeffs: torch.Tensor = attrs.field(default=None, converter=_to_tensor)

    def __attrs_post_init__(self) -> None:
        """Fill defaults and check shapes."""
        n = 2 ** (self.depth + 1) - 1
        d = self.space.d
        if self.mean.numel() == 0:
            self.mean = torch.zeros(d, dtype=DTYPE)
        if self.coeffs.numel() == 0:
            self.coeffs = torch.zeros(n, d, dtype=DTYPE)
        self.mean = self.mean.reshape(d)
        if self.coeffs.dim() == 1:
            self.coeffs = self.coeffs.unsqueeze(-1)
        if tuple(self.coeffs.shape) != (n, d):
            raise ValueError(
                f"invalid-depth: coefficients of shape {tuple(self.coeffs.shape)} "
                f"do not match depth {self.depth} and dimension {d}"
            )

    def __repr__(self) -> str:
        """Return string representation of the expansion."""
        return (
            f"HaarExpansion(depth={self.depth}, space={self.space}, "
            f"nonzero={int((self.coeffs.abs().sum(-1) > 0).sum())})"
        )

    @classmethod
    def zeros(cls, depth: int, space: SpaceSpec = None) -> "HaarExpansion":
        """Get the zero expansion of a given depth."""
        return cls(depth, space or SpaceSpec.scalar())

    @classmethod
    def haar(
        cls,
        interval: Union[DyadicInterval, str],
        depth: int = None,
        space: SpaceSpec = None,
        vector: ArrayLike = None,
    ) -> "HaarExpansion":
        """Get the expansion `vector * h_I`.

        Args:
            interval: the support I of the Haar function.
            depth: expansion depth, defaults to level(I).
            space: coefficient space, defaults to scalars.
            vector: the coefficient, defaults to 1 in every component.

        Returns:
            The expansion with a single non-zero coefficient.
        """
        interval = DyadicInterval.coerce(interval)
        depth = interval.level if depth is None else depth
        if interval.level > depth:
            raise ValueError(f"invalid-depth: {interval} is deeper than depth {depth}")
        space = space or SpaceSpec.scalar()
        f = cls.zeros(depth, space)
        vector = torch.ones(space.d, dtype=DTYPE) if vector is None else _to_tensor(vector)
        f.coeffs[interval.bfs_index] = vector.reshape(space.d)
        return f

    @classmethod
    def from_coefficients(
        cls,
        coeffs: dict,
        depth: int = None,
        space: SpaceSpec = None,
        mean: ArrayLike = None,
    ) -> "HaarExpansion":
        """Build an expansion from a `{interval: vector}` mapping.

        Args:
            coeffs: mapping from intervals (or `"k:i"` strings) to vectors.
            depth: expansion depth, defaults to the deepest key.
            space: coefficient space, defaults to scalars.
            mean: optional mean vector.

        Returns:
            The expansion.
        """
        keyed = {DyadicInterval.coerce(k): v for k, v in coeffs.items()}
        if depth is None:
            depth = max((k.level for k in keyed), default=0)
        f = cls(depth, space or SpaceSpec.scalar(), mean=mean)
        for interval, vector in keyed.items():
            if interval.level > depth:
                raise ValueError(f"invalid-depth: {interval} deeper than depth {depth}")
            f.coeffs[interval.bfs_index] = _to_tensor(vector).reshape(f.space.d)
        return f

    @classmethod
    def from_values(
        cls, values: ArrayLike, space: SpaceSpec = None
    ) -> "HaarExpansion":
        """Analyze step values on a grid of 2^(N+1) cells into a depth-N expansion.

        Args:
            values: array of shape (cells,) or (cells, d).
            space: coefficient space, defaults to scalars.

        Returns:
            The expansion whose synthesis reproduces `values`.
        """
        from dyrex.space.transform import analyze

        space = space or SpaceSpec.scalar()
        values = _to_tensor(values)
        if values.dim() == 1:
            values = values.unsqueeze(-1)
        cells = values.shape[0]
        depth = cells.bit_length() - 2
        if cells < 2 or 2 ** (depth + 1) != cells:
            raise ValueError(f"invalid-depth: {cells} cells is not a power of two >= 2")
        mean, coeffs = analyze(values, depth)
        return cls(depth, space, mean=mean, coeffs=coeffs)

    @property
    def n_cells(self) -> int:
        """Number of grid cells 2^(N+1)."""
        return 2 ** (self.depth + 1)

    @property
    def is_zero_mean(self) -> bool:
        """Membership in L^p_{X,0}."""
        return bool(torch.all(self.mean == 0))

    def coefficient(self, interval: Union[DyadicInterval, str]) -> torch.Tensor:
        """Get a_I."""
        interval = DyadicInterval.coerce(interval)
        if interval.level > self.depth:
            return torch.zeros(self.space.d, dtype=DTYPE)
        return self.coeffs[interval.bfs_index]

    def values(self) -> torch.Tensor:
        """Synthesize the step values of shape (cells, d)."""
        from dyrex.space.transform import synthesize

        return synthesize(self.mean, self.coeffs, self.depth)

    def level_slice(self, level: int) -> "HaarExpansion":
        """Get the martingale difference Σ_{I ∈ D_level} a_I h_I (same depth)."""
        from dyrex.space.transform import level_slice

        out = HaarExpansion.zeros(self.depth, self.space)
        if 0 <= level <= self.depth:
            out.coeffs[level_slice(level)] = self.coeffs[level_slice(level)]
        return out

    def extend(self, depth: int) -> "HaarExpansion":
        """Embed into a deeper grid by padding with zero coefficients."""
        if depth < self.depth:
            raise ValueError(f"invalid-depth: cannot shrink depth {self.depth} to {depth}")
        n = 2 ** (depth + 1) - 1
        coeffs = torch.zeros(n, self.space.d, dtype=DTYPE)
        coeffs[: self.coeffs.shape[0]] = self.coeffs
        return HaarExpansion(depth, self.space, mean=self.mean.clone(), coeffs=coeffs)

    def scale(self, factor: float) -> "HaarExpansion":
        """Get `factor * f`."""
        return HaarExpansion(
            self.depth, self.space, mean=self.mean * factor, coeffs=self.coeffs * factor
        )

    def __add__(self, other: "HaarExpansion") -> "HaarExpansion":
        """Sum of two expansions, padded to the larger depth."""
        depth = max(self.depth, other.depth)
        a, b = self.extend(depth), other.extend(depth)
        return HaarExpansion(
            depth, self.space, mean=a.mean + b.mean, coeffs=a.coeffs + b.coeffs
        )

    def to_dict(self) -> dict:
        """Convert to the expansion JSON layout, keeping non-zero coefficients."""
        from dyrex.io.interval import DyadicInterval

        nonzero = torch.nonzero(self.coeffs.abs().sum(-1) > 0).flatten().tolist()
        return {
            "depth": self.depth,
            "space": self.space.to_dict(),
            "mean": self.mean.tolist(),
            "coeffs": {
                str(DyadicInterval.from_bfs_index(i)): self.coeffs[i].tolist()
                for i in nonzero
            },
        }

    def to_json(self) -> str:
        """Serialize to JSON."""
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "HaarExpansion":
        """Inverse of `to_dict`."""
        return cls.from_coefficients(
            data.get("coeffs", {}),
            depth=data["depth"],
            space=SpaceSpec.from_dict(data.get("space", {})),
            mean=data.get("mean"),
        )

    @classmethod
    def from_json(cls, text: str) -> "HaarExpansion":
        """Parse from JSON text."""
        return cls.from_dict(json.loads(text))

    def to_csv(self, save_path: Union[str, Path] = None) -> pd.DataFrame:
        """Dump the step values as a table of (cell, components).

        Args:
            save_path: optional path of the .csv file.

        Returns:
            A DataFrame with a `cell` column and one column per component.
        """
        values = self.values().numpy()
        save_df = pd.DataFrame(
            {f"x{j}": values[:, j] for j in range(values.shape[1])}
        )
        save_df.insert(0, "cell", np.arange(values.shape[0]))
        if save_path:
            save_df.to_csv(save_path, index=False)
        return save_df


def _to_times(data: ArrayLike) -> torch.Tensor:
    """Convert stopping time values, mapping None to infinity."""
    if isinstance(data, torch.Tensor):
        return data.to(DTYPE)
    return torch.tensor(
        [math.inf if v is None else float(v) for v in data], dtype=DTYPE
    )


@attrs.define(eq=False)
class StoppingTimeGrid:
    """Stopping time ν on the grid of a depth-N expansion.

    Attributes:
        depth: N; the grid has 2^(N+1) cells and ν takes values in {0,...,N+1, ∞}.
        values: tensor with one value per cell (`math.inf` for ∞).
    """

    depth: int = attrs.field(converter=int)
    values: torch.Tensor = attrs.field(converter=_to_times)

    def __attrs_post_init__(self) -> None:
        """Check range and adaptedness."""
        cells = 2 ** (self.depth + 1)
        if self.values.shape != (cells,):
            raise ValueError(
                f"invalid-depth: expected {cells} stopping time values, "
                f"found {tuple(self.values.shape)}"
            )
        finite = self.values[torch.isfinite(self.values)]
        if len(finite) and (
            torch.any(finite < 0)
            or torch.any(finite > self.depth + 1)
            or torch.any(finite != finite.round())
        ):
            raise ValueError("Stopping time values must lie in {0,...,N+1} or be inf")
        for n in range(self.depth + 2):
            event = (self.values <= n).reshape(2**n, -1)
            if not torch.all(event.all(-1) | ~event.any(-1)):
                raise ValueError(
                    f"Stopping time is not adapted: {{nu <= {n}}} is not F_{n}-measurable"
                )

    @classmethod
    def constant(cls, depth: int, value: float = math.inf) -> "StoppingTimeGrid":
        """Get the constant stopping time."""
        return cls(depth, torch.full((2 ** (depth + 1),), float(value), dtype=DTYPE))

    @classmethod
    def hitting(
        cls, intervals: list[DyadicInterval], depth: int
    ) -> "StoppingTimeGrid":
        """Get ν = level(J) on each J of a disjoint family and ∞ elsewhere.

        Args:
            intervals: pairwise disjoint dyadic intervals of level <= N + 1.
            depth: N.

        Returns:
            The stopping time.
        """
        values = torch.full((2 ** (depth + 1),), math.inf, dtype=DTYPE)
        for interval in map(DyadicInterval.coerce, intervals):
            cells = interval.cells(depth + 1)
            if torch.isfinite(values[cells.start : cells.stop]).any():
                raise ValueError("Intervals of a hitting time must be disjoint")
            values[cells.start : cells.stop] = interval.level
        return cls(depth, values)

    def stopped_measure(self) -> float:
        """Get P(ν < ∞)."""
        return float(torch.isfinite(self.values).to(DTYPE).mean())


@attrs.define(eq=False)
class Atom:
    """Candidate atom a with associated stopping time ν.

    Attributes:
        expansion: the function a.
        nu: the stopping time on the same grid.
    """

    expansion: HaarExpansion
    nu: StoppingTimeGrid

    def __attrs_post_init__(self) -> None:
        """Check that function and stopping time share a grid."""
        if self.expansion.depth != self.nu.depth:
            raise ValueError(
                f"invalid-depth: atom depth {self.expansion.depth} != stopping time "
                f"depth {self.nu.depth}"
            )


def _to_signs(data: ArrayLike) -> torch.Tensor:
    """Convert sign data to a float64 tensor."""
    return _to_tensor(data).flatten()


@attrs.define(eq=False)
class SignPattern:
    """Multipliers θ_I ∈ [-1, 1] for every I ∈ D_0^N.

    Attributes:
        depth: N.
        signs: tensor of shape (2^(N+1) - 1,) in breadth-first order.
    """

    depth: int = attrs.field(converter=int)
    signs: torch.Tensor = attrs.field(converter=_to_signs)

    def __attrs_post_init__(self) -> None:
        """Check size and range."""
        n = 2 ** (self.depth + 1) - 1
        if self.signs.shape != (n,):
            raise ValueError(f"Expected {n} multipliers, found {tuple(self.signs.shape)}")
        if torch.any(self.signs.abs() > 1):
            raise ValueError("Multipliers must lie in [-1, 1]")

    @classmethod
    def constant(cls, depth: int, value: float = 1.0) -> "SignPattern":
        """Get θ ≡ value."""
        return cls(depth, torch.full((2 ** (depth + 1) - 1,), float(value), dtype=DTYPE))

    @classmethod
    def from_bits(cls, depth: int, bits: int) -> "SignPattern":
        """Get the ±1 pattern whose bit j selects -1 on the j-th interval."""
        n = 2 ** (depth + 1) - 1
        return cls(depth, [(-1.0 if (bits >> j) & 1 else 1.0) for j in range(n)])

    @classmethod
    def by_level(cls, depth: int, level_signs: ArrayLike) -> "SignPattern":
        """Get a pattern that is constant on each level (θ_I = r_level(I))."""
        level_signs = list(level_signs)
        if len(level_signs) != depth + 1:
            raise ValueError(f"Expected {depth + 1} level signs, found {len(level_signs)}")
        return cls(
            depth,
            [float(level_signs[k]) for k in range(depth + 1) for _ in range(2**k)],
        )

    def __getitem__(self, interval: Union[DyadicInterval, str]) -> float:
        """Get θ_I."""
        return float(self.signs[DyadicInterval.coerce(interval).bfs_index])
