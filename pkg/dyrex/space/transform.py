"""Batched fast Haar transforms on the uniform dyadic grid.

A depth-N expansion has coefficients on D_0^N (2^(N+1) - 1 intervals in
breadth-first order) and is evaluated on the 2^(N+1) cells of level N + 1.
All functions accept arbitrary leading batch dimensions and are differentiable.
"""

import math
import torch
from functools import lru_cache
from dyrex.io.space_spec import DTYPE


def n_intervals(depth: int) -> int:
    """Get |D_0^N|."""
    return 2 ** (depth + 1) - 1


def n_cells(depth: int) -> int:
    """Get the number of grid cells of a depth-N expansion."""
    return 2 ** (depth + 1)


def level_slice(level: int) -> slice:
    """Get the breadth-first slice holding the intervals of one level."""
    return slice(2**level - 1, 2 ** (level + 1) - 1)


@lru_cache(maxsize=64)
def _half_signs(width: int) -> torch.Tensor:
    """Get the pattern (+1 x width/2, -1 x width/2) as a column."""
    half = width // 2
    return torch.cat(
        [torch.ones(half, dtype=DTYPE), -torch.ones(half, dtype=DTYPE)]
    ).unsqueeze(-1)


def synthesize(mean: torch.Tensor, coeffs: torch.Tensor, depth: int) -> torch.Tensor:
    """Evaluate mean + Σ_I a_I h_I on the grid.

    Args:
        mean: tensor of shape (..., d).
        coeffs: tensor of shape (..., 2^(N+1) - 1, d).
        depth: N.

    Returns:
        Step values of shape (..., 2^(N+1), d).
    """
    cells = n_cells(depth)
    if coeffs.shape[-2] != n_intervals(depth):
        raise ValueError(
            f"invalid-depth: expected {n_intervals(depth)} coefficients for depth "
            f"{depth}, found {coeffs.shape[-2]}"
        )
    batch = coeffs.shape[:-2]
    d = coeffs.shape[-1]
    values = mean.unsqueeze(-2).expand(*batch, cells, d)
    for level in range(depth + 1):
        width = cells >> level
        block = coeffs[..., level_slice(level), :]
        block = block.unsqueeze(-2).expand(*batch, 2**level, width, d)
        signs = _half_signs(width).to(coeffs.device)
        values = values + (block * signs).reshape(*batch, cells, d)
    return values


def analyze(values: torch.Tensor, depth: int) -> tuple[torch.Tensor, torch.Tensor]:
    """Compute mean and Haar coefficients a_I = <f, h_I> / |I| of step values.

    Args:
        values: tensor of shape (..., 2^(N+1), d).
        depth: N.

    Returns:
        `(mean, coeffs)` of shapes (..., d) and (..., 2^(N+1) - 1, d).
    """
    cells = n_cells(depth)
    if values.shape[-2] != cells:
        raise ValueError(
            f"invalid-depth: expected {cells} cells for depth {depth}, "
            f"found {values.shape[-2]}"
        )
    batch = values.shape[:-2]
    d = values.shape[-1]
    mean = values.mean(dim=-2)
    blocks = []
    for level in range(depth + 1):
        halves = values.reshape(*batch, 2**level, 2, cells >> (level + 1), d).mean(dim=-2)
        blocks.append((halves[..., 0, :] - halves[..., 1, :]) / 2)
    return mean, torch.cat(blocks, dim=-2)


def project(values: torch.Tensor, level: int) -> torch.Tensor:
    """Conditional expectation E(f | F_level) of step values.

    Args:
        values: tensor of shape (..., 2^M, d) on a grid of level M.
        level: n with 0 <= n <= M.

    Returns:
        Step values on the same grid, constant on intervals of `level`.
    """
    cells = values.shape[-2]
    grid_level = cells.bit_length() - 1
    if not 0 <= level <= grid_level:
        raise ValueError(
            f"invalid-depth: projection level {level} outside [0, {grid_level}]"
        )
    batch = values.shape[:-2]
    d = values.shape[-1]
    width = cells >> level
    means = values.reshape(*batch, 2**level, width, d).mean(dim=-2, keepdim=True)
    return means.expand(*batch, 2**level, width, d).reshape(*batch, cells, d)


def refine(values: torch.Tensor, level: int) -> torch.Tensor:
    """Repeat step values from a grid of 2^k cells onto a grid of 2^level cells.

    Args:
        values: tensor of shape (..., 2^k, d).
        level: target grid level, at least k.

    Returns:
        Tensor of shape (..., 2^level, d).
    """
    cells = values.shape[-2]
    factor = 2**level // cells
    if factor < 1 or factor * cells != 2**level:
        raise ValueError(f"invalid-depth: cannot refine {cells} cells to level {level}")
    return values.repeat_interleave(factor, dim=-2)


def grid_norm_p(norms: torch.Tensor, p: float) -> torch.Tensor:
    """Get (mean over cells of norms^p)^(1/p) over the last dimension."""
    if not 1 <= p < math.inf:
        raise ValueError(f"invalid-exponent: p must lie in [1, inf), found {p}")
    return norms.pow(p).mean(dim=-1).pow(1.0 / p)
