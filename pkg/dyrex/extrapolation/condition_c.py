"""Condition C(X, p, κ) for decompositions of the intervals below a root J_0."""

import logging
import torch
from fractions import Fraction
from typing import Optional, Union
from numpy.typing import ArrayLike
from dyrex.io.interval import DyadicInterval, IntervalCollection
from dyrex.io.decomposition import CDecomposition
from dyrex.io.estimate import CheckReport
from dyrex.io.rearrangement_map import RearrangementMap
from dyrex.io.space_spec import SpaceSpec, DTYPE
from dyrex.dyadic import shadow, union_measure
from dyrex.space.transform import n_intervals, synthesize
from dyrex.space.haar import lp_norm_values
from dyrex.operators.haar_operator import LinearHaarOperator, gamma_weights
from dyrex.operators.norm_search import maximize_ratio, operator_norm_search
from dyrex.rearrangement.semenov import shadow_semenov

logger = logging.getLogger(__name__)


def _mask(collection: IntervalCollection, depth: int) -> torch.Tensor:
    """Get the (n, 1) 0/1 mask of a collection in breadth-first order."""
    mask = torch.zeros(n_intervals(depth), 1, dtype=DTYPE)
    for interval in collection:
        mask[interval.bfs_index] = 1.0
    return mask


def semenov_decomposition(
    tau: RearrangementMap,
    root: Union[DyadicInterval, str],
    p: float = 2.0,
    p_star: float = None,
    kappa: float = None,
) -> CDecomposition:
    """Get the single part decomposition K_1 = {I ⊆ J_0} of a root.

    Args:
        tau: the rearrangement.
        root: J_0.
        p: the exponent.
        p_star: defaults to p.
        kappa: defaults to the exact shadow Semenov ratio of τ.

    Returns:
        The decomposition.
    """
    root = DyadicInterval.coerce(root)
    if kappa is None:
        kappa = float(shadow_semenov(tau).value)
    return CDecomposition(
        root,
        [shadow(root, tau.source_depth)],
        p=p,
        p_star=p if p_star is None else p_star,
        kappa=kappa,
    )


def _beta(
    part: IntervalCollection,
    weights: torch.Tensor,
    depth: int,
    p: float,
    space: SpaceSpec,
    restarts: int,
    iterations: int,
    seed: int,
) -> tuple[float, str]:
    """Get β = ‖Σ_{I∈K} a_I h_I ↦ Σ γ_I^(1/q) a_I h_I‖^q and how it was obtained."""
    q = p / (p - 1)
    mask = _mask(part, depth)
    values = weights[mask[:, 0] > 0]
    if torch.all(values == values[0]):
        return float(values[0]), "exact"
    n = n_intervals(depth)
    multiplier = LinearHaarOperator(
        depth,
        depth,
        torch.arange(n),
        weights.pow(1.0 / q) * mask[:, 0],
        source_space=space,
    )
    estimate = operator_norm_search(multiplier, p, restarts, iterations, seed, support=mask)
    return estimate.value**q, "lower_bound"


def _c3_ratio(
    dec: CDecomposition,
    depth: int,
    space: SpaceSpec,
    samples: int,
    iterations: int,
    seed: int,
) -> tuple[float, torch.Tensor]:
    """Search the largest (Σ_i ‖f_i‖^p* )^(1/p*) / ‖f‖_p* over f below the root."""
    p_star = dec.p_star
    parts = torch.stack([_mask(part, depth) for part in dec.parts])
    support = _mask(shadow(dec.root, depth), depth)

    def objective(x):
        zeros = torch.zeros(x.shape[0], space.d, dtype=DTYPE)
        pieces = x.unsqueeze(1) * parts
        piece_norms = lp_norm_values(
            synthesize(zeros.unsqueeze(1), pieces, depth), p_star, space
        )
        num = piece_norms.pow(p_star).sum(-1).pow(1.0 / p_star)
        den = lp_norm_values(synthesize(zeros, x, depth), p_star, space)
        return num, den

    best, value, _ = maximize_ratio(
        objective,
        (n_intervals(depth), space.d),
        samples,
        iterations,
        seed,
        support=support,
    )
    return value, best


def check_condition_C(
    dec: CDecomposition,
    tau: RearrangementMap,
    gamma: Optional[Union[ArrayLike, torch.Tensor]] = None,
    space: SpaceSpec = None,
    restarts: int = 64,
    iterations: int = 200,
    samples: int = 16,
    seed: int = 0,
    tol: float = 1e-9,
) -> CheckReport:
    """Check C1, C2 and C3 of condition C for one decomposition.

    C1 and the measures in C2 are exact. β_i is exact when γ is constant on K_i
    and a searched lower bound otherwise, so a C2 failure is certified and a
    pass holds at search precision. C3 is checked by ascent from `samples`
    random coefficient tuples.

    Args:
        dec: the decomposition of the intervals below J_0.
        tau: the rearrangement.
        gamma: positive weights γ_I in breadth-first order, defaults to
            |I| / |τ(I)|.
        space: the coefficient space X.
        restarts: restarts of each β_i search.
        iterations: ascent steps of the searches.
        samples: random starts of the C3 search.
        seed: base seed.
        tol: tolerance of the floating point comparisons.

    Returns:
        A report with one sub-report per clause under `details`.
    """
    depth = tau.source_depth
    space = space or SpaceSpec.scalar()
    dec.check_partition(depth)
    weights = (
        gamma_weights(tau) if gamma is None else torch.as_tensor(gamma, dtype=DTYPE)
    )
    if weights.shape != (n_intervals(depth),) or torch.any(weights <= 0):
        raise ValueError("invalid-weights: need one positive γ_I per interval")
    kappa = Fraction(dec.kappa)
    root_measure = dec.root.measure

    c1_sum = sum((union_measure(part) for part in dec.parts), Fraction(0))
    c1 = CheckReport("C1", c1_sum, kappa * root_measure, c1_sum <= kappa * root_measure)

    betas, kinds, images = [], [], []
    for i, part in enumerate(dec.parts):
        beta, kind = _beta(
            part, weights, depth, dec.p, space, restarts, iterations, seed + i
        )
        betas.append(beta)
        kinds.append(kind)
        images.append(union_measure(tau.image(part)))
    c2_sum = sum(b * float(m) for b, m in zip(betas, images))
    c2_rhs = float(kappa * root_measure)
    c2 = CheckReport(
        "C2",
        c2_sum,
        c2_rhs,
        c2_sum <= c2_rhs * (1 + tol),
        details={"beta": betas, "beta_kind": kinds, "image_measures": images},
    )

    c3_value, c3_witness = _c3_ratio(dec, depth, space, samples, iterations, seed)
    c3 = CheckReport(
        "C3",
        c3_value,
        dec.kappa,
        c3_value <= dec.kappa * (1 + tol),
        details={"p_star": dec.p_star},
        counterexample=None if c3_value <= dec.kappa * (1 + tol) else c3_witness,
    )
    passed = bool(c1) and bool(c2) and bool(c3)
    logger.info(
        f"Condition C at root {dec.root}: C1 {c1.passed}, C2 {c2.passed}, C3 {c3.passed}"
    )
    return CheckReport(
        "condition-C",
        max(float(c1.lhs) / float(c1.rhs), c2.lhs / c2.rhs, c3.lhs / c3.rhs),
        1.0,
        passed,
        details={
            "root": str(dec.root),
            "parts": len(dec.parts),
            "kappa": dec.kappa,
            "C1": c1,
            "C2": c2,
            "C3": c3,
        },
    )


def check_condition_C_all(
    tau: RearrangementMap,
    kappa: float = None,
    p: float = 2.0,
    p_star: float = None,
    decompositions: Optional[list[CDecomposition]] = None,
    gamma: Optional[Union[ArrayLike, torch.Tensor]] = None,
    space: SpaceSpec = None,
    restarts: int = 64,
    iterations: int = 200,
    samples: int = 16,
    seed: int = 0,
) -> CheckReport:
    """Check condition C for every root J_0 ∈ D_0^N.

    Roots without a supplied decomposition use `semenov_decomposition`.

    Returns:
        A report whose `lhs` is the worst normalized clause ratio over all roots;
        `details["roots"]` holds the per root reports.
    """
    depth = tau.source_depth
    if kappa is None:
        kappa = float(shadow_semenov(tau).value)
    supplied = {dec.root: dec for dec in decompositions or []}
    reports = []
    for k in range(depth + 1):
        for i in range(2**k):
            root = DyadicInterval(k, i)
            dec = supplied.get(root) or semenov_decomposition(tau, root, p, p_star, kappa)
            reports.append(
                check_condition_C(
                    dec, tau, gamma, space, restarts, iterations, samples, seed
                )
            )
    failed = [r.details["root"] for r in reports if not r]
    return CheckReport(
        "condition-C-all",
        max(r.lhs for r in reports),
        1.0,
        not failed,
        details={"roots": reports},
        counterexample={"roots": failed} if failed else None,
    )
