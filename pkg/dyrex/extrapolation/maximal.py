"""The shift operators P_{k,τ} and the maximal inequality for adapted sequences."""

import logging
import torch
from typing import Union
from numpy.typing import ArrayLike
from dyrex.io.interval import DyadicInterval
from dyrex.io.decomposition import AdaptedSequence
from dyrex.io.estimate import CheckReport
from dyrex.io.rearrangement_map import RearrangementMap
from dyrex.io.space_spec import DTYPE
from dyrex.operators.norm_search import restart_generator

logger = logging.getLogger(__name__)


def shift_matrix(
    tau: RearrangementMap, level: int, grid_level: int = None
) -> torch.Tensor:
    """Get the (2^grid_level, 2^level) matrix of γ ↦ P_{level,τ}(γ).

    Entry (c, i) is 1 when cell c lies in τ of the i-th interval of the level.

    Args:
        tau: the rearrangement, defined on the level.
        level: the level k of the weights.
        grid_level: level of the output grid, defaults to target_depth + 1.

    Returns:
        The 0/1 matrix.
    """
    if not 0 <= level <= tau.source_depth:
        raise ValueError(
            f"invalid-depth: level {level} outside the domain of depth {tau.source_depth}"
        )
    if grid_level is None:
        grid_level = tau.target_depth + 1
    if grid_level < tau.target_depth:
        raise ValueError(
            f"invalid-depth: grid level {grid_level} is coarser than the images"
        )
    matrix = torch.zeros(2**grid_level, 2**level, dtype=DTYPE)
    for i in range(2**level):
        cells = tau(DyadicInterval(level, i)).cells(grid_level)
        matrix[cells.start : cells.stop, i] = 1.0
    return matrix


def level_values(gamma: Union[ArrayLike, torch.Tensor], level: int) -> torch.Tensor:
    """Reduce step values that are constant on the intervals of a level to 2^level values.

    Args:
        gamma: step values on a grid of 2^m >= 2^level cells.
        level: k.

    Returns:
        Tensor of shape (..., 2^level).

    Raises:
        ValueError: `invalid-weights` if γ is not constant on D_k.
    """
    gamma = torch.as_tensor(gamma, dtype=DTYPE)
    cells = gamma.shape[-1]
    if cells < 2**level or cells % 2**level:
        raise ValueError(
            f"invalid-weights: {cells} values cannot hold weights of level {level}"
        )
    blocks = gamma.reshape(*gamma.shape[:-1], 2**level, cells // 2**level)
    if not torch.all(blocks == blocks[..., :1]):
        raise ValueError(f"invalid-weights: weights are not constant on D_{level}")
    return blocks[..., 0]


def p_shift(
    tau: RearrangementMap,
    level: int,
    gamma: Union[ArrayLike, torch.Tensor],
    grid_level: int = None,
) -> torch.Tensor:
    """Get P_{k,τ}(γ)(t) = Σ_{I ∈ D_k} γ(I) 1_{τ(I)}(t) as step values.

    Args:
        tau: the rearrangement.
        level: k.
        gamma: weights constant on D_k, as 2^k level values or finer step values;
            leading batch dimensions are kept.
        grid_level: level of the output grid, defaults to target_depth + 1.

    Returns:
        Tensor of shape (..., 2^grid_level).
    """
    values = level_values(gamma, level)
    return values @ shift_matrix(tau, level, grid_level).T


def maximal_sides(
    tau: RearrangementMap, levels: torch.Tensor
) -> tuple[torch.Tensor, torch.Tensor]:
    """Get (∫ sup_k P_{k,τ}(Z_k), ∫ Z_n) for batched level values.

    Args:
        tau: the rearrangement.
        levels: tensor of shape (..., n + 1, 2^n); row k holds Z_k on the level-n
            grid.

    Returns:
        Both integrals with shape (...).
    """
    n = levels.shape[-2] - 1
    if n > tau.source_depth:
        raise ValueError(
            f"invalid-depth: sequence of depth {n} exceeds the domain depth "
            f"{tau.source_depth}"
        )
    shifted = [
        p_shift(tau, k, levels[..., k, :: 2 ** (n - k)]) for k in range(n + 1)
    ]
    lhs = torch.stack(shifted, dim=-1).amax(dim=-1).mean(dim=-1)
    rhs = levels[..., n, :].mean(dim=-1)
    return lhs, rhs


def check_maximal_inequality(
    tau: RearrangementMap,
    Z: AdaptedSequence,
    kappa: float,
    tol: float = 1e-12,
) -> CheckReport:
    """Check ∫ sup_k P_{k,τ}(Z_k) <= κ ∫ Z_n for one adapted sequence.

    The hypothesis is that τ is measure preserving with Semenov constant κ; the
    caller certifies that, e.g. with `semenov_exact`.

    Args:
        tau: the rearrangement.
        Z: a nonnegative nondecreasing adapted sequence.
        kappa: the Semenov constant.
        tol: additive tolerance.

    Returns:
        The report; `rhs` is κ ∫ Z_n.
    """
    if not isinstance(Z, AdaptedSequence):
        Z = AdaptedSequence(Z)
    lhs, integral = maximal_sides(tau, Z.values)
    lhs, rhs = float(lhs), kappa * float(integral)
    passed = lhs <= rhs + tol
    return CheckReport(
        "maximal-inequality",
        lhs,
        rhs,
        passed,
        details={"kappa": kappa, "depth": Z.depth},
        counterexample=None if passed else {"Z": Z.values},
    )


def maximal_inequality_suite(
    tau: RearrangementMap,
    kappa: float,
    depth: int = None,
    samples: int = 1000,
    seed: int = 0,
    tol: float = 1e-12,
) -> CheckReport:
    """Check the maximal inequality on random adapted sequences.

    Sample s is drawn from the generator of (seed, s), so any failure can be
    replayed on its own.

    Args:
        tau: the rearrangement.
        kappa: the Semenov constant.
        depth: depth n of the sequences, defaults to the domain depth of τ.
        samples: number of sequences.
        seed: base seed.
        tol: additive tolerance.

    Returns:
        A report whose `lhs` is the worst ∫ sup_k P_k Z_k - κ ∫ Z_n and `rhs` is
        `tol`; the counterexample holds the first failing sample.
    """
    if samples <= 0:
        raise ValueError(f"invalid-budget: samples must be > 0, found {samples}")
    depth = tau.source_depth if depth is None else depth
    batch = torch.stack(
        [
            AdaptedSequence.random(depth, restart_generator(seed, s)).values
            for s in range(samples)
        ]
    )
    lhs, integral = maximal_sides(tau, batch)
    excess = lhs - kappa * integral
    failures = torch.nonzero(excess > tol).flatten().tolist()
    worst = int(torch.argmax(excess))
    logger.info(
        f"Maximal inequality: {len(failures)} failures over {samples} samples, "
        f"worst excess {float(excess[worst]):.3g}"
    )
    counterexample = None
    if failures:
        s = failures[0]
        counterexample = {
            "sample": s,
            "lhs": float(lhs[s]),
            "rhs": kappa * float(integral[s]),
            "Z": batch[s],
        }
    return CheckReport(
        "maximal-inequality",
        float(excess[worst]),
        tol,
        not failures,
        details={
            "kappa": kappa,
            "depth": depth,
            "samples": samples,
            "seed": seed,
            "worst_ratio": float((lhs / integral.clamp(min=1e-300)).max()),
        },
        counterexample=counterexample,
    )
