"""τ-monotone sublinear operators built from the level images T_τ d_k."""

import attrs
import logging
import torch
from typing import Optional
from dyrex.io.decomposition import AdaptedSequence
from dyrex.io.estimate import CheckReport
from dyrex.io.expansion import HaarExpansion
from dyrex.io.rearrangement_map import RearrangementMap
from dyrex.io.space_spec import SpaceSpec, DTYPE
from dyrex.space.transform import level_slice, n_intervals, synthesize
from dyrex.operators.haar_operator import rearrangement_operator
from dyrex.operators.constants import rademacher_signs
from dyrex.operators.norm_search import restart_generator
from dyrex.extrapolation.maximal import p_shift

logger = logging.getLogger(__name__)


def _level_masks(depth: int) -> torch.Tensor:
    """Get the (N + 1, n, 1) masks selecting each level of D_0^N."""
    masks = torch.zeros(depth + 1, n_intervals(depth), 1, dtype=DTYPE)
    for k in range(depth + 1):
        masks[k, level_slice(k)] = 1.0
    return masks


def level_images(tau: RearrangementMap, coeffs: torch.Tensor) -> torch.Tensor:
    """Get the step values of T_τ d_k for every level k of batched coefficients.

    A measure preserving τ keeps levels, so T_τ d_k is the level-k part of T_τ f.

    Args:
        tau: a measure preserving rearrangement.
        coeffs: zero mean coefficients of shape (..., n, d) on D_0^N.

    Returns:
        Tensor of shape (..., N + 1, 2^(L+1), d) with L the target depth.
    """
    if not tau.measure_preserving:
        raise ValueError("domain-mismatch: level images need a measure preserving τ")
    image = rearrangement_operator(tau, 2.0).apply_coeffs(coeffs)
    masks = _level_masks(tau.target_depth)[: tau.source_depth + 1]
    per_level = image.unsqueeze(-3) * masks
    zeros = torch.zeros(*per_level.shape[:-2], per_level.shape[-1], dtype=DTYPE)
    return synthesize(zeros, per_level, tau.target_depth)


def _coeffs_of(f: HaarExpansion, depth: int) -> torch.Tensor:
    """Get the coefficients of a zero mean expansion extended to a depth."""
    if not f.is_zero_mean:
        raise ValueError("not-zero-mean: τ-monotone operators act on zero mean f")
    return f.extend(depth).coeffs


@attrs.define(eq=False)
class SquareFunctionOperator:
    """A(f) = (Σ_k ‖T_τ d_k‖_X^2)^(1/2), τ-monotone with constant 1.

    Attributes:
        tau: a measure preserving rearrangement.
        space: the coefficient space X.
    """

    tau: RearrangementMap
    space: SpaceSpec = attrs.field(factory=SpaceSpec.scalar)

    @property
    def depth(self) -> int:
        """Get the depth of the inputs."""
        return self.tau.source_depth

    def values(self, coeffs: torch.Tensor) -> torch.Tensor:
        """Get A(f) on the grid for batched coefficients (..., n, d)."""
        norms = self.space.norm(level_images(self.tau, coeffs))
        return norms.pow(2).sum(dim=-2).sqrt()

    def __call__(self, f: HaarExpansion) -> torch.Tensor:
        """Get the step values of A(f)."""
        return self.values(_coeffs_of(f, self.depth))


@attrs.define(eq=False)
class RademacherAverageOperator:
    """A(f)(t) = E ‖Σ_k r_k (T_τ d_k)(t)‖_X, τ-monotone with constant 1.

    Exact mode averages over all 2^(N+1) sign vectors; sampled mode uses a fixed
    sample of them.

    Attributes:
        tau: a measure preserving rearrangement.
        space: the coefficient space X.
        mode: `exact` or `sampled`.
        samples: number of sign vectors in sampled mode.
        seed: seed of the sampled sign vectors.
    """

    tau: RearrangementMap
    space: SpaceSpec = attrs.field(factory=SpaceSpec.scalar)
    mode: str = "exact"
    samples: int = 4096
    seed: int = 0
    signs: torch.Tensor = attrs.field(init=False)

    def __attrs_post_init__(self) -> None:
        """Draw the sign vectors."""
        levels = self.depth + 1
        if self.mode == "exact" and levels > 12:
            raise ValueError(
                f"too-large: exact Rademacher averages allow at most 12 levels, "
                f"found {levels}"
            )
        self.signs = rademacher_signs(levels, self.mode, self.samples, self.seed)

    @property
    def depth(self) -> int:
        """Get the depth of the inputs."""
        return self.tau.source_depth

    def values(self, coeffs: torch.Tensor) -> torch.Tensor:
        """Get A(f) on the grid for batched coefficients (..., n, d)."""
        images = level_images(self.tau, coeffs)
        sums = torch.einsum("mk,...kcd->...mcd", self.signs, images)
        return self.space.norm(sums).mean(dim=-2)

    def __call__(self, f: HaarExpansion) -> torch.Tensor:
        """Get the step values of A(f)."""
        return self.values(_coeffs_of(f, self.depth))


def a_square(tau: RearrangementMap, f: HaarExpansion) -> torch.Tensor:
    """Get (Σ_k ‖T_τ d_k‖_X^2)^(1/2) as step values."""
    return SquareFunctionOperator(tau, f.space)(f)


def a_rademacher(
    tau: RearrangementMap,
    f: HaarExpansion,
    mode: str = "exact",
    samples: int = 4096,
    seed: int = 0,
) -> torch.Tensor:
    """Get E ‖Σ_k r_k T_τ d_k‖_X as step values."""
    return RademacherAverageOperator(tau, f.space, mode, samples, seed)(f)


def random_adapted_multipliers(
    depth: int, generator: torch.Generator = None, offset: float = 0.1
) -> AdaptedSequence:
    """Draw strictly positive nondecreasing adapted multipliers γ_0 <= ... <= γ_N."""
    sequence = AdaptedSequence.random(depth, generator)
    return AdaptedSequence(sequence.values + offset)


def multiplier_coeffs(gamma: AdaptedSequence) -> torch.Tensor:
    """Get γ_k(I) for every I ∈ D_0^N in breadth-first order."""
    return torch.cat([gamma.level(k) for k in range(gamma.depth + 1)])


def sup_shift(
    tau: RearrangementMap, gamma: torch.Tensor, grid_level: int = None
) -> torch.Tensor:
    """Get sup_k |P_{k,τ}(γ_k)| on the grid.

    Args:
        tau: the rearrangement.
        gamma: breadth-first multipliers of shape (..., n).
        grid_level: level of the output grid, defaults to target_depth + 1.

    Returns:
        Tensor of shape (..., 2^grid_level).
    """
    depth = n_intervals_depth(gamma.shape[-1])
    shifted = [
        p_shift(tau, k, gamma[..., level_slice(k)], grid_level).abs()
        for k in range(depth + 1)
    ]
    return torch.stack(shifted, dim=-1).amax(dim=-1)


def n_intervals_depth(n: int) -> int:
    """Inverse of `n_intervals`."""
    depth = (n + 1).bit_length() - 2
    if n_intervals(depth) != n:
        raise ValueError(f"invalid-depth: {n} is not the size of some D_0^N")
    return depth


def check_tau_monotone(
    A,
    tau: RearrangementMap,
    c: float = 1.0,
    samples: int = 500,
    seed: int = 0,
    tol: float = 1e-10,
    gamma: Optional[AdaptedSequence] = None,
) -> CheckReport:
    """Check A(Σ γ_k d_k) <= c sup_k |P_{k,τ}(γ_k)| A(Σ d_k) on every grid cell.

    Args:
        A: an operator with `depth` and batched `values(coeffs)`.
        tau: the rearrangement.
        c: the monotonicity constant.
        samples: number of random (γ, f) pairs.
        seed: base seed; sample s uses the generator of (seed, s).
        tol: relative and absolute tolerance.
        gamma: fixed multipliers used for every sample instead of random ones.

    Returns:
        A report with the worst (lhs - bound) / (1 + bound) as `lhs` and `tol`
        as `rhs`.
    """
    if samples <= 0:
        raise ValueError(f"invalid-budget: samples must be > 0, found {samples}")
    depth = A.depth
    d = getattr(A, "space", SpaceSpec.scalar()).d
    gammas, coeffs = [], []
    for s in range(samples):
        gen = restart_generator(seed, s)
        multipliers = gamma if gamma is not None else random_adapted_multipliers(depth, gen)
        gammas.append(multiplier_coeffs(multipliers))
        coeffs.append(torch.randn(n_intervals(depth), d, generator=gen, dtype=DTYPE))
    gammas, coeffs = torch.stack(gammas), torch.stack(coeffs)
    lhs = A.values(coeffs * gammas.unsqueeze(-1))
    bound = c * sup_shift(tau, gammas) * A.values(coeffs)
    excess = (lhs - bound) / (1 + bound)
    worst_per_sample = excess.amax(dim=-1)
    failures = torch.nonzero(worst_per_sample > tol).flatten().tolist()
    worst = int(torch.argmax(worst_per_sample))
    logger.info(
        f"τ-monotonicity with c={c}: {len(failures)} failures over {samples} samples"
    )
    counterexample = None
    if failures:
        s = failures[0]
        cell = int(torch.argmax(excess[s]))
        counterexample = {
            "sample": s,
            "cell": cell,
            "lhs": float(lhs[s, cell]),
            "bound": float(bound[s, cell]),
            "gamma": gammas[s],
            "coeffs": coeffs[s],
        }
    return CheckReport(
        "tau-monotone",
        float(worst_per_sample[worst]),
        tol,
        not failures,
        details={"c": c, "samples": samples, "seed": seed, "operator": type(A).__name__},
        counterexample=counterexample,
    )


def sup_power_identity(
    tau: RearrangementMap, gamma: AdaptedSequence, r: float, tol: float = 1e-12
) -> CheckReport:
    """Check |P_{k,τ}(γ_k)|^r = P_{k,τ}(|γ_k|^r) pointwise for every level k."""
    worst = 0.0
    for k in range(gamma.depth + 1):
        level = gamma.level(k)
        lhs = p_shift(tau, k, level).abs().pow(r)
        rhs = p_shift(tau, k, level.abs().pow(r))
        worst = max(worst, float(((lhs - rhs).abs() / (1 + rhs.abs())).max()))
    return CheckReport("sup-power-identity", worst, tol, worst <= tol, details={"r": r})


def normalized_image_identity(
    tau: RearrangementMap, f: HaarExpansion, gamma: AdaptedSequence, tol: float = 1e-12
) -> CheckReport:
    """Check T_τ(d_k) / P_{k,τ}(γ_k) = T_τ(d_k / γ_k) pointwise for γ > 0."""
    weights = multiplier_coeffs(gamma)
    if torch.any(weights <= 0):
        raise ValueError("invalid-weights: multipliers must be strictly positive")
    coeffs = _coeffs_of(f, tau.source_depth)
    images = level_images(tau, coeffs)
    scaled = level_images(tau, coeffs / weights.unsqueeze(-1))
    worst = 0.0
    for k in range(tau.source_depth + 1):
        beta = p_shift(tau, k, gamma.level(k)).unsqueeze(-1)
        diff = images[k] / beta - scaled[k]
        worst = max(worst, float((diff.abs() / (1 + scaled[k].abs())).max()))
    return CheckReport("normalized-image-identity", worst, tol, worst <= tol)
