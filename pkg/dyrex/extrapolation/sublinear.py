"""Extrapolation of L^p bounds of τ-monotone operators down to L^q, q < p."""

import logging
import math
import torch
from typing import Optional, Sequence
from dyrex.io.estimate import CheckReport, NormEstimate
from dyrex.io.expansion import HaarExpansion
from dyrex.io.space_spec import DTYPE
from dyrex.space.transform import grid_norm_p, n_intervals, synthesize
from dyrex.space.haar import lp_norm, lp_norm_values
from dyrex.operators.norm_search import maximize_ratio

logger = logging.getLogger(__name__)


def sublinear_norm_search(
    A,
    p: float,
    restarts: int = 64,
    iterations: int = 200,
    seed: int = 0,
    initial: Optional[Sequence[HaarExpansion]] = None,
    verbose: bool = False,
) -> NormEstimate:
    """Lower bound of ‖A: L^p_{X,0} → L^p‖ for a homogeneous operator A.

    Args:
        A: an operator with `depth`, `space` and batched `values(coeffs)`
            returning nonnegative step values.
        p: the exponent.
        restarts: number of random starts.
        iterations: ascent steps per start.
        seed: base seed.
        initial: optional expansions used as extra starts.
        verbose: per iteration debug logging.

    Returns:
        A `lower_bound` estimate with a recheckable witness.
    """
    depth, space = A.depth, A.space
    extra = None
    if initial:
        extra = torch.stack([f.extend(depth).coeffs for f in initial])

    def objective(x):
        zeros = torch.zeros(x.shape[0], space.d, dtype=DTYPE)
        num = grid_norm_p(A.values(x), p)
        den = lp_norm_values(synthesize(zeros, x, depth), p, space)
        return num, den

    best, _, _ = maximize_ratio(
        objective,
        (n_intervals(depth), space.d),
        restarts,
        iterations,
        seed,
        initial=extra,
        verbose=verbose,
    )
    witness = HaarExpansion(depth, space, coeffs=best)
    value = float(grid_norm_p(A(witness), p)) / lp_norm(witness, p)
    return NormEstimate(
        value,
        "lower_bound",
        restarts=restarts,
        iterations=iterations,
        seed=seed,
        witness=witness,
        meta={"p": p, "operator": type(A).__name__},
    )


def extrapolation_factor(p: float, q: float, kappa: float, c: float = 1.0) -> float:
    """Get c (3p / (q - 1)) κ^(1/r) with 1/q = 1/r + 1/p."""
    if not 1 < q < p < math.inf:
        raise ValueError(
            f"invalid-exponents: need 1 < q < p < inf, found q={q}, p={p}"
        )
    inv_r = 1.0 / q - 1.0 / p
    return c * 3 * p / (q - 1) * kappa**inv_r


def check_extrapolation_42(
    A,
    kappa: float,
    c: float,
    p: float,
    q: float,
    restarts: int = 64,
    iterations: int = 200,
    seed: int = 0,
    tolerance: float = 0.05,
) -> CheckReport:
    """Check ‖A‖_q <= c (3p / (q - 1)) κ^(1/r) ‖A‖_p for a τ-monotone A.

    The rearrangement τ is the one A is built on. ‖A‖_q is a searched lower
    bound; ‖A‖_p is a dense search with four times the budget standing in for
    its value, so the check is one sided.

    Args:
        A: a τ-monotone operator with constant c.
        kappa: the Semenov constant of τ.
        c: the monotonicity constant.
        p: the upper exponent.
        q: the lower exponent, 1 < q < p.
        restarts: number of restarts of the q search.
        iterations: ascent steps per restart.
        seed: base seed.
        tolerance: multiplicative slack.

    Returns:
        The report with the searched ‖A‖_q as `lhs` and the bound as `rhs`.
    """
    factor = extrapolation_factor(p, q, kappa, c)
    lower = sublinear_norm_search(A, q, restarts, iterations, seed)
    upper = sublinear_norm_search(A, p, 4 * restarts, 4 * iterations, seed)
    bound = factor * upper.value
    passed = lower.value <= bound * (1 + tolerance)
    logger.info(
        f"‖A‖_{q:g} >= {lower.value:.6g}, bound {bound:.6g} "
        f"(factor {factor:.6g}, ‖A‖_{p:g} ~ {upper.value:.6g})"
    )
    return CheckReport(
        "extrapolation",
        lower.value,
        bound,
        passed,
        details={
            "p": p,
            "q": q,
            "kappa": kappa,
            "c": c,
            "factor": factor,
            "norm_q": lower,
            "norm_p": upper,
            "tolerance": tolerance,
        },
        counterexample=None if passed else {"witness": lower.witness},
    )
