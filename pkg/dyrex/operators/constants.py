"""Estimators of UMD_p and type p constants of the coefficient space."""

import logging
import torch
from dyrex.io.expansion import HaarExpansion, SignPattern
from dyrex.io.estimate import NormEstimate, CheckReport
from dyrex.io.interval import IntervalCollection
from dyrex.io.rearrangement_map import RearrangementMap
from dyrex.io.space_spec import SpaceSpec, DTYPE
from dyrex.space.transform import n_intervals, synthesize
from dyrex.space.haar import lp_norm, lp_norm_values
from dyrex.operators.haar_operator import (
    apply_martingale_transform,
    apply_rearrangement,
    martingale_transform_operator,
    rearrangement_operator,
)
from dyrex.rearrangement.builders import BlockPermutation, glued_depth, glued_families
from dyrex.operators.norm_search import (
    operator_norm_search,
    projected_ascent,
    random_starts,
    restart_generator,
)

logger = logging.getLogger(__name__)


def rademacher_signs(
    n: int, mode: str = "exact", samples: int = 4096, seed: int = 0
) -> torch.Tensor:
    """Get Bernoulli sign vectors of length n.

    Args:
        n: number of signs.
        mode: `exact` for all 2^n vectors, `sampled` for random ones.
        samples: number of sampled vectors.
        seed: seed of the sampled vectors.

    Returns:
        A (M, n) tensor of ±1.
    """
    if mode == "exact":
        codes = torch.arange(2**n).unsqueeze(-1)
        bits = (codes >> torch.arange(n)) & 1
        return (1 - 2 * bits).to(DTYPE)
    if mode == "sampled":
        gen = restart_generator(seed, 0)
        return torch.randint(0, 2, (samples, n), generator=gen).to(DTYPE) * 2 - 1
    raise ValueError(f"Unknown mode '{mode}', expected exact or sampled")


def rademacher_average(
    vectors: torch.Tensor,
    space: SpaceSpec,
    p: float,
    mode: str = "exact",
    samples: int = 4096,
    seed: int = 0,
    signs: torch.Tensor = None,
) -> torch.Tensor:
    """Get (E ‖Σ_k r_k a_k‖_X^p)^(1/p).

    Args:
        vectors: tensor of shape (..., n, d) holding a_1, ..., a_n.
        space: the space X.
        p: the exponent.
        mode: `exact` enumeration or `sampled`.
        samples: number of sampled sign vectors.
        seed: seed of sampled sign vectors.
        signs: optional precomputed (M, n) sign matrix.

    Returns:
        Tensor of shape (...).
    """
    if signs is None:
        signs = rademacher_signs(vectors.shape[-2], mode, samples, seed)
    sums = torch.einsum("mk,...kd->...md", signs, vectors)
    return space.norm(sums).pow(p).mean(dim=-1).pow(1.0 / p)


def type_witness_ratio(space: SpaceSpec, q: float, n: int) -> float:
    """Ratio (E‖Σ r_k e_k‖^q)^(1/q) / (Σ ‖e_k‖^q)^(1/q) of the unit vector witness.

    For X = ℓ_r^d with d >= n this equals n^(1/r - 1/q).
    """
    if space.d < n:
        raise ValueError(f"Need dimension >= {n} for unit vectors, found {space.d}")
    vectors = torch.eye(n, space.d, dtype=DTYPE)
    mode = "exact" if n <= 12 else "sampled"
    average = float(rademacher_average(vectors, space, q, mode=mode, samples=64))
    return average / n ** (1.0 / q)


def type_constant(
    space: SpaceSpec,
    p: float,
    n: int,
    mode: str = "auto",
    restarts: int = 64,
    iterations: int = 200,
    seed: int = 0,
    samples: int = 4096,
    cap: int = 12,
) -> NormEstimate:
    """Lower bound of the type p constant of X restricted to n vectors.

    Maximizes (E‖Σ r_k a_k‖^p)^(1/p) / (Σ ‖a_k‖^p)^(1/p) over (a_k) by
    multi-start ascent. Averages are exact for n <= cap and use a fixed sample
    of sign vectors otherwise.

    Args:
        space: the space X.
        p: the exponent.
        n: number of vectors.
        mode: `exact`, `sampled` or `auto`.
        restarts: number of random starts.
        iterations: ascent steps per start.
        seed: base seed.
        samples: number of sign vectors in sampled mode.
        cap: largest n for exact enumeration.

    Returns:
        A `lower_bound` estimate with the vectors as witness.
    """
    if mode == "auto":
        mode = "exact" if n <= cap else "sampled"
    if mode == "exact" and n > cap:
        raise ValueError(f"too-large: exact Rademacher averages allow n <= {cap}")
    signs = rademacher_signs(n, mode, samples, seed)

    def objective(x):
        num = rademacher_average(x, space, p, signs=signs)
        den = space.norm(x).pow(p).sum(-1).pow(1.0 / p)
        return num, den

    starts = random_starts((n, space.d), restarts, seed)
    x, values = projected_ascent(objective, starts, iterations)
    best = int(torch.argmax(values))
    witness = x[best].detach()
    num, den = objective(witness.unsqueeze(0))
    return NormEstimate(
        float(num[0] / den[0]),
        "lower_bound",
        restarts=restarts,
        iterations=iterations,
        seed=seed,
        witness=witness,
        meta={"p": p, "n": n, "mode": mode, "space": str(space)},
    )


def _sign_patterns(
    n: int, mode: str, samples: int, seed: int, cap: int
) -> torch.Tensor:
    """Get the sign patterns searched by `umd_constant`, θ ≡ 1 first."""
    if mode == "exact":
        if n > cap:
            raise ValueError(
                f"too-large: {n} intervals exceed the exact UMD cap of {cap}"
            )
        # θ and -θ give the same norm, so θ on the unit interval stays +1
        rest = rademacher_signs(n - 1, "exact")
        return torch.cat([torch.ones(rest.shape[0], 1, dtype=DTYPE), rest], dim=1)
    if mode == "random":
        patterns = rademacher_signs(n, "sampled", samples, seed)
        return torch.cat([torch.ones(1, n, dtype=DTYPE), patterns])
    raise ValueError(f"Unknown mode '{mode}', expected exact or random")


def umd_constant(
    space: SpaceSpec,
    p: float,
    depth: int,
    mode: str = "exact",
    restarts: int = 8,
    iterations: int = 200,
    seed: int = 0,
    samples: int = 64,
    cap: int = 7,
    warm_start: NormEstimate = None,
) -> NormEstimate:
    """Lower bound of the depth N truncated UMD_p constant of X.

    Searches sup_θ ‖f ↦ Σ θ_I a_I h_I‖ over ±1 patterns θ on D_0^N: every pattern
    in exact mode, random ones in random mode, each with `restarts` ascent runs
    over zero mean f.

    Args:
        space: the space X.
        p: the exponent.
        depth: N.
        mode: `exact` or `random`.
        restarts: ascent runs per pattern.
        iterations: ascent steps per run.
        seed: base seed.
        samples: number of random patterns.
        cap: largest |D_0^N| for exact mode.
        warm_start: a result at a smaller depth whose witness and pattern are
            added as an extra start, so that results are nondecreasing in N.

    Returns:
        A `lower_bound` estimate with the witness expansion and
        `meta["signs"]` holding the pattern.
    """
    if restarts <= 0 or iterations < 0:
        raise ValueError("invalid-budget: restarts must be > 0")
    n, d = n_intervals(depth), space.d
    patterns = _sign_patterns(n, mode, samples, seed, cap)
    thetas = patterns.repeat_interleave(restarts, dim=0)
    starts = random_starts((n, d), thetas.shape[0], seed)
    if warm_start is not None:
        prev = warm_start.witness.extend(depth).coeffs
        prev_signs = torch.ones(n, dtype=DTYPE)
        old = torch.as_tensor(warm_start.meta["signs"], dtype=DTYPE)
        prev_signs[: old.numel()] = old
        thetas = torch.cat([thetas, prev_signs.unsqueeze(0)])
        starts = torch.cat([starts, prev.unsqueeze(0)])
    theta_batch = thetas.unsqueeze(-1)

    def objective(x):
        zeros = torch.zeros(x.shape[0], d, dtype=DTYPE)
        num = lp_norm_values(synthesize(zeros, theta_batch * x, depth), p, space)
        den = lp_norm_values(synthesize(zeros, x, depth), p, space)
        return num, den

    x, values = projected_ascent(objective, starts, iterations)
    best = int(torch.argmax(values))
    theta = SignPattern(depth, thetas[best])
    witness = HaarExpansion(depth, space, coeffs=x[best].detach())
    value = lp_norm(apply_martingale_transform(theta, witness), p) / lp_norm(witness, p)
    logger.info(
        f"UMD_{p:g} lower bound {value:.9g} at depth {depth} over "
        f"{patterns.shape[0]} patterns"
    )
    return NormEstimate(
        value,
        "lower_bound",
        restarts=restarts,
        iterations=iterations,
        seed=seed,
        witness=witness,
        meta={"signs": theta.signs.tolist(), "mode": mode, "patterns": patterns.shape[0]},
    )


def lower_half_support(depth: int) -> torch.Tensor:
    """Get the (n, 1) mask of D^- = {I ⊆ [0, 1/2) : 1 <= level(I) <= N}."""
    mask = torch.zeros(n_intervals(depth), 1, dtype=DTYPE)
    for k in range(1, depth + 1):
        for interval in IntervalCollection.level_intervals(k, within="1:0"):
            mask[interval.bfs_index] = 1.0
    return mask


def alternating_signs(depth: int) -> SignPattern:
    """Get θ_I = (-1)^level(I)."""
    return SignPattern.by_level(depth, [(-1.0) ** k for k in range(depth + 1)])


def alternating_sign_test(
    space: SpaceSpec,
    p: float,
    depth: int,
    restarts: int = 64,
    iterations: int = 200,
    seed: int = 0,
) -> NormEstimate:
    """Lower bound of the alternating level transform Σ (-1)^k a_I h_I on D^-.

    Args:
        space: the space X.
        p: the exponent.
        depth: N.
        restarts: number of random starts.
        iterations: ascent steps per start.
        seed: base seed.

    Returns:
        A `lower_bound` estimate whose witness is supported on D^-.
    """
    op = martingale_transform_operator(alternating_signs(depth), space)
    support = lower_half_support(depth)
    estimate = operator_norm_search(op, p, restarts, iterations, seed, support=support)
    estimate.meta["support"] = "lower_half"
    return estimate


def check_alternating_envelope(
    tau: RearrangementMap, f: HaarExpansion, p: float
) -> CheckReport:
    """Check ‖f - 2g‖ <= ‖f‖ + 2‖T_τ f‖ for f supported on D^- and g its even levels.

    For the parity shift the even level part g equals T_τ f on [0, 1/2), so the
    inequality holds for every such f.

    Args:
        tau: the parity shift.
        f: zero mean expansion supported on D^-.
        p: the exponent.

    Returns:
        The report.
    """
    even = torch.tensor(
        [
            1.0 if ((j + 1).bit_length() - 1) % 2 == 0 else 0.0
            for j in range(n_intervals(f.depth))
        ],
        dtype=DTYPE,
    ).unsqueeze(-1)
    g = HaarExpansion(f.depth, f.space, coeffs=f.coeffs * even)
    lhs = lp_norm(f + g.scale(-2.0), p)
    rhs = lp_norm(f, p) + 2 * lp_norm(apply_rearrangement(tau, p, f), p)
    return CheckReport(
        "alternating-envelope", lhs, rhs, lhs <= rhs * (1 + 1e-12) + 1e-12
    )


def check_umd_envelope(
    tau: RearrangementMap,
    space: SpaceSpec,
    p: float,
    restarts: int = 8,
    iterations: int = 200,
    seed: int = 0,
    tolerance: float = 0.05,
    cap: int = 7,
) -> CheckReport:
    """Check L <= 2U(1 + tol) and U <= 3L(1 + tol) for the parity shift.

    L is the searched norm of Id_X ⊗ T_τ and U the exhaustive UMD_p lower bound
    at the depth of τ.

    Returns:
        A report with `lhs = max(L / 2U, U / 3L)` and `rhs = 1 + tol`.
    """
    depth = tau.source_depth
    norm = operator_norm_search(
        rearrangement_operator(tau, p, space), p, 4 * restarts, iterations, seed
    )
    umd = umd_constant(space, p, depth, "exact", restarts, iterations, seed, cap=cap)
    upper = norm.value / (2 * umd.value)
    lower = umd.value / (3 * norm.value)
    lhs = max(upper, lower)
    return CheckReport(
        "umd-envelope",
        lhs,
        1 + tolerance,
        lhs <= 1 + tolerance,
        details={"operator_norm": norm, "umd": umd, "p": p},
    )


def block_witness(
    family: BlockPermutation, vectors: torch.Tensor, space: SpaceSpec
) -> HaarExpansion:
    """Get f = Σ_k Σ_{I ∈ A_k} a_k h_I for the families A_1, ..., A_n of a block map.

    On I_k the function is ±a_k and T_τ f on I_0 is Σ_k r_k a_k, so the Rayleigh
    ratio of f is the Rademacher ratio of (a_k).

    Args:
        family: the block permutation with its families.
        vectors: tensor (n, d) holding a_1, ..., a_n.
        space: the space X.

    Returns:
        The zero mean expansion at the depth of the map.
    """
    depth = family.map.source_depth
    f = HaarExpansion.zeros(depth, space)
    for k, collection in enumerate(family.families):
        if len(collection) != 2 ** (k + 1):
            raise ValueError(
                f"invalid-depth: family A_{k + 1} is truncated at depth {depth}"
            )
        for interval in collection:
            f.coeffs[interval.bfs_index] = vectors[k]
    return f


def glued_type_witness(n: int, space: SpaceSpec, q: float) -> NormEstimate:
    """Lower bound of ‖Id_X ⊗ T_τ‖ on L^q from the unit vector witness on glued family n.

    The glued map is built at the smallest depth holding family n completely and
    the witness takes a_k = e_k.

    Args:
        n: the family index.
        space: X, of dimension >= n.
        q: the exponent.

    Returns:
        A `lower_bound` estimate; `meta["witness_ratio"]` holds the Rademacher
        ratio of (e_k), which the value equals up to rounding.
    """
    if space.d < n:
        raise ValueError(f"Need dimension >= {n} for unit vectors, found {space.d}")
    family = glued_families(glued_depth(n), n)
    f = block_witness(family, torch.eye(n, space.d, dtype=DTYPE), space)
    value = lp_norm(apply_rearrangement(family.map, q, f), q) / lp_norm(f, q)
    return NormEstimate(
        value,
        "lower_bound",
        witness=f,
        meta={
            "n": n,
            "q": q,
            "depth": family.map.source_depth,
            "witness_ratio": type_witness_ratio(space, q, n),
        },
    )
