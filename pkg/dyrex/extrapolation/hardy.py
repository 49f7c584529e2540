"""The operators A_p and the H^1 bound implied by condition C."""

import logging
import torch
from typing import Optional, Union
from numpy.typing import ArrayLike
from dyrex.io.interval import IntervalCollection
from dyrex.io.decomposition import CDecomposition
from dyrex.io.estimate import CheckReport, NormEstimate
from dyrex.io.expansion import HaarExpansion
from dyrex.io.rearrangement_map import RearrangementMap
from dyrex.io.space_spec import SpaceSpec, DTYPE
from dyrex.space.transform import n_intervals
from dyrex.space.haar import h1_norm, h1_norm_coeffs
from dyrex.space.atoms import build_atom, simple_atom
from dyrex.operators.haar_operator import LinearHaarOperator, a_p_operator
from dyrex.operators.norm_search import maximize_ratio, operator_norm_exact_small
from dyrex.rearrangement.semenov import shadow_semenov
from dyrex.extrapolation.condition_c import check_condition_C_all

logger = logging.getLogger(__name__)


def apply_A_p(
    matrix: Union[ArrayLike, torch.Tensor],
    tau: RearrangementMap,
    gamma: Optional[Union[ArrayLike, torch.Tensor]],
    p: float,
    f: HaarExpansion,
    target_space: SpaceSpec = None,
) -> HaarExpansion:
    """Get A_p f = Σ S a_I γ_I^(1/p) h_{τ(I)}.

    Args:
        matrix: S: X → Y as a dense (d_Y, d_X) matrix.
        tau: the injection τ.
        gamma: positive weights in breadth-first order, None for |I| / |τ(I)|.
        p: the exponent.
        f: zero mean expansion over X.
        target_space: Y, defaults to the kind of X with dimension d_Y.

    Returns:
        The image expansion over Y.
    """
    return a_p_operator(matrix, tau, p, gamma, f.space, target_space)(f)


def _atom_starts(
    depth: int, space: SpaceSpec, count: int, seed: int
) -> torch.Tensor:
    """Coefficients of the simple atoms h_J / |J| and `count` random atoms."""
    atoms = [
        simple_atom(interval, depth, space)
        for interval in IntervalCollection.all_intervals(depth)
    ]
    atoms += [build_atom(depth, space, seed=seed + i) for i in range(count)]
    return torch.stack([atom.expansion.coeffs for atom in atoms])


def h1_norm_search(
    op: LinearHaarOperator,
    restarts: int = 64,
    iterations: int = 200,
    seed: int = 0,
    atoms: int = 32,
) -> NormEstimate:
    """Lower bound of ‖op: H^1_X → H^1_Y‖.

    Starts are random zero mean expansions, every simple atom h_J / |J| and
    `atoms` random atoms.

    Args:
        op: a coefficientwise linear operator.
        restarts: number of random starts.
        iterations: ascent steps per start.
        seed: base seed.
        atoms: number of random atoms added as starts.

    Returns:
        A `lower_bound` estimate with a recheckable witness.
    """
    depth, space = op.source_depth, op.source_space

    def objective(x):
        num = h1_norm_coeffs(op.apply_coeffs(x), op.target_depth, op.target_space)
        den = h1_norm_coeffs(x, depth, space)
        return num, den

    best, _, _ = maximize_ratio(
        objective,
        (n_intervals(depth), space.d),
        restarts,
        iterations,
        seed,
        initial=_atom_starts(depth, space, atoms, seed),
    )
    witness = HaarExpansion(depth, space, coeffs=best)
    value = h1_norm(op(witness)) / h1_norm(witness)
    return NormEstimate(
        value,
        "lower_bound",
        restarts=restarts,
        iterations=iterations,
        seed=seed,
        witness=witness,
        meta={"norm": "H1", "atoms": atoms},
    )


def h1_bound_factor(p: float, kappa: float, q_star: float) -> float:
    """Get 18p / (p - 1) κ^(1 + 1/q_*)."""
    return 18 * p / (p - 1) * kappa ** (1 + 1 / q_star)


def check_theorem_52(
    tau: RearrangementMap,
    p: float = 2.0,
    kappa: float = None,
    p_star: float = None,
    matrix: Optional[Union[ArrayLike, torch.Tensor]] = None,
    gamma: Optional[Union[ArrayLike, torch.Tensor]] = None,
    decompositions: Optional[list[CDecomposition]] = None,
    space: SpaceSpec = None,
    restarts: int = 64,
    iterations: int = 200,
    atoms: int = 32,
    seed: int = 0,
    tolerance: float = 0.05,
    cap: int = 64,
) -> CheckReport:
    """Check ‖A_1‖_{H^1} <= 18p / (p - 1) κ^(1 + 1/q_*) ‖A_p‖_{L^p}.

    Condition C is checked first for every root J_0 (with the supplied
    decompositions or the single part ones). ‖A_1‖_{H^1} is a searched lower
    bound and ‖A_p‖_{L^p} comes from `operator_norm_exact_small`.

    Args:
        tau: the injection τ.
        p: the exponent, p > 1.
        kappa: the constant κ, defaults to the shadow Semenov ratio of τ.
        p_star: the exponent p_* of condition C, defaults to p.
        matrix: S, defaults to the identity of X.
        gamma: positive weights in breadth-first order, None for |I| / |τ(I)|.
        decompositions: decompositions for some roots.
        space: X.
        restarts: restarts of the searches.
        iterations: ascent steps of the searches.
        atoms: random atoms among the H^1 starts.
        seed: base seed.
        tolerance: multiplicative slack.
        cap: coefficient cap of the dense L^p estimate.

    Returns:
        The report with the H^1 lower bound as `lhs` and the bound as `rhs`.
    """
    if p <= 1:
        raise ValueError(f"invalid-exponents: p must be > 1, found {p}")
    space = space or SpaceSpec.scalar()
    if kappa is None:
        kappa = float(shadow_semenov(tau).value)
    p_star = p if p_star is None else p_star
    if matrix is None:
        matrix = torch.eye(space.d, dtype=DTYPE)
    condition = check_condition_C_all(
        tau,
        kappa,
        p,
        p_star,
        decompositions,
        gamma,
        space,
        restarts,
        iterations,
        seed=seed,
    )
    target = space if torch.as_tensor(matrix).shape[0] == space.d else None
    a_p = a_p_operator(matrix, tau, p, gamma, space, target)
    a_1 = a_p_operator(matrix, tau, 1.0, gamma, space, target)
    norm_p = operator_norm_exact_small(a_p, p, cap, restarts, iterations, seed)
    norm_h1 = h1_norm_search(a_1, restarts, iterations, seed, atoms)
    q_star = p_star / (p_star - 1)
    factor = h1_bound_factor(p, kappa, q_star)
    bound = factor * norm_p.value
    holds = norm_h1.value <= bound * (1 + tolerance)
    logger.info(
        f"‖A_1‖_H1 >= {norm_h1.value:.6g}, bound {bound:.6g}; "
        f"condition C {'holds' if condition.passed else 'fails'}"
    )
    return CheckReport(
        "h1-bound",
        norm_h1.value,
        bound,
        holds and condition.passed,
        details={
            "p": p,
            "p_star": p_star,
            "kappa": kappa,
            "factor": factor,
            "norm_p": norm_p,
            "norm_h1": norm_h1,
            "condition_C": condition,
            "tolerance": tolerance,
        },
        counterexample=None if holds else {"witness": norm_h1.witness},
    )
