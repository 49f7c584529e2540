"""Haar functions, L^p_X norms, martingale projections and Hardy space norms."""

import torch
from typing import Union
from dyrex.io.interval import DyadicInterval
from dyrex.io.expansion import HaarExpansion
from dyrex.io.space_spec import SpaceSpec, DTYPE
from dyrex.space.transform import project, grid_norm_p, synthesize


def haar_function(
    interval: Union[DyadicInterval, str],
    depth: int = None,
    space: SpaceSpec = None,
    sign: int = 1,
) -> HaarExpansion:
    """Get the L^∞ normalized Haar function h_I.

    Args:
        interval: the support I.
        depth: expansion depth N >= level(I), defaults to level(I).
        space: coefficient space; vector valued h_I carries 1 in every component.
        sign: +1 for the convention (+1 on the left half, -1 on the right half),
            -1 for the mirrored one.

    Returns:
        The expansion with the single coefficient `sign` at I.
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, found {sign}")
    space = space or SpaceSpec.scalar()
    return HaarExpansion.haar(
        interval, depth, space, vector=sign * torch.ones(space.d, dtype=DTYPE)
    )


def _values_of(f: Union[HaarExpansion, torch.Tensor]) -> torch.Tensor:
    """Get step values (cells, d) of an expansion or pass values through."""
    if isinstance(f, HaarExpansion):
        return f.values()
    if f.dim() == 1:
        return f.unsqueeze(-1)
    return f


def lp_norm_values(
    values: torch.Tensor, p: float, space: SpaceSpec = None
) -> torch.Tensor:
    """Batched differentiable ‖f‖_{L^p_X} of step values.

    Args:
        values: tensor of shape (..., cells, d).
        p: exponent in [1, ∞).
        space: coefficient space, defaults to scalars.

    Returns:
        Tensor of shape (...).
    """
    space = space or SpaceSpec.scalar()
    return grid_norm_p(space.norm(values), p)


def lp_norm(
    f: Union[HaarExpansion, torch.Tensor], p: float, space: SpaceSpec = None
) -> float:
    """Get ‖f‖_{L^p_X} = (Σ_cells |cell| ‖f(cell)‖_X^p)^(1/p).

    Args:
        f: an expansion or step values of shape (cells,) / (cells, d).
        p: exponent in [1, ∞).
        space: coefficient space for raw values (expansions carry their own).

    Returns:
        The norm.
    """
    if isinstance(f, HaarExpansion):
        space = f.space
    return float(lp_norm_values(_values_of(f), p, space))


def martingale_projection(
    f: Union[HaarExpansion, torch.Tensor], n: int
) -> torch.Tensor:
    """Get E(f | F_n) as step values on the grid of f.

    Args:
        f: an expansion of depth N or its step values.
        n: 0 <= n <= N + 1.

    Returns:
        Step values of shape (cells, d) constant on intervals of level n.
    """
    return project(_values_of(f), n)


def maximal_function_values(values: torch.Tensor, space: SpaceSpec = None) -> torch.Tensor:
    """Get the martingale maximal function sup_n ‖E(f|F_n)‖_X on the grid.

    Args:
        values: tensor of shape (..., 2^M, d); n runs over 0..M.
        space: coefficient space.

    Returns:
        Tensor of shape (..., 2^M).
    """
    space = space or SpaceSpec.scalar()
    grid_level = values.shape[-2].bit_length() - 1
    norms = [space.norm(project(values, n)) for n in range(grid_level + 1)]
    return torch.stack(norms, dim=0).amax(dim=0)


def hp_norm_values(
    values: torch.Tensor, p: float = 1.0, space: SpaceSpec = None
) -> torch.Tensor:
    """Batched ‖sup_n ‖E(f|F_n)‖_X‖_{L^p} of step values."""
    return grid_norm_p(maximal_function_values(values, space), p)


def hp_norm(f: HaarExpansion, p: float = 1.0) -> float:
    """Get the maximal function norm ‖sup_n ‖E(f|F_n)‖_X‖_{L^p} of an expansion."""
    return float(hp_norm_values(f.values(), p, f.space))


def h1_norm(f: HaarExpansion) -> float:
    """Get ‖f‖_{H^1_X} = ∫ max_{n=0..N+1} ‖E(f|F_n)(t)‖_X dt.

    Args:
        f: a zero mean expansion.

    Returns:
        The H^1 norm.
    """
    if not f.is_zero_mean:
        raise ValueError("not-zero-mean: H^1 norm is defined on zero mean functions")
    return hp_norm(f, 1.0)


def h1_norm_coeffs(
    coeffs: torch.Tensor, depth: int, space: SpaceSpec = None
) -> torch.Tensor:
    """Batched differentiable H^1 norm of zero mean coefficient tensors (..., n, d)."""
    mean = torch.zeros(*coeffs.shape[:-2], coeffs.shape[-1], dtype=coeffs.dtype)
    return hp_norm_values(synthesize(mean, coeffs, depth), 1.0, space)
