"""Numerical estimation of operator norms on Haar expansions.

All searches maximize a ratio num(x) / den(x) of two homogeneous functionals of a
coefficient tensor x by projected gradient ascent on the sphere {den = 1}, run
for a batch of restarts at once. Only lower bounds are claimed, except for the
exact Hilbert space case of `operator_norm_exact_small`.
"""

import logging
import warnings
import torch
from typing import Callable, Optional, Sequence
from dyrex.io.expansion import HaarExpansion
from dyrex.io.estimate import NormEstimate, CheckReport
from dyrex.io.space_spec import DTYPE
from dyrex.space.transform import n_intervals
from dyrex.space.haar import lp_norm
from dyrex.operators.haar_operator import LinearHaarOperator

logger = logging.getLogger(__name__)

Objective = Callable[[torch.Tensor], tuple[torch.Tensor, torch.Tensor]]


def restart_generator(seed: int, restart: int) -> torch.Generator:
    """Get the torch generator of one restart, derived from (seed, restart)."""
    return torch.Generator().manual_seed(int(seed) * 1_000_003 + int(restart))


def random_starts(
    shape: Sequence[int], restarts: int, seed: int
) -> torch.Tensor:
    """Draw one standard normal start per restart, each from its own generator."""
    return torch.stack(
        [
            torch.randn(*shape, generator=restart_generator(seed, r), dtype=DTYPE)
            for r in range(restarts)
        ]
    )


def _ratio(objective: Objective, x: torch.Tensor) -> torch.Tensor:
    """Evaluate num / den."""
    num, den = objective(x)
    return num / den


def _normalize(objective: Objective, x: torch.Tensor) -> torch.Tensor:
    """Project onto {den = 1}."""
    with torch.no_grad():
        _, den = objective(x)
    return x / den.reshape(-1, *([1] * (x.dim() - 1)))


def projected_ascent(
    objective: Objective,
    x0: torch.Tensor,
    iterations: int = 200,
    support: Optional[torch.Tensor] = None,
    initial_step: float = 1.0,
    armijo: float = 1e-4,
    max_backtracks: int = 30,
    tol: float = 1e-12,
    verbose: bool = False,
) -> tuple[torch.Tensor, torch.Tensor]:
    """Maximize num / den for a batch of starts by projected gradient ascent.

    Each step moves along the gradient of the ratio, projects back onto the
    sphere {den = 1} and is accepted by Armijo backtracking, so the ratio of
    every restart is nondecreasing.

    Args:
        objective: maps a batch x of shape (R, ...) to (num, den) of shape (R,).
        x0: starting points of shape (R, ...).
        iterations: maximal number of ascent steps.
        support: optional 0/1 mask broadcastable to x0; coordinates outside
            stay zero.
        initial_step: first trial step.
        armijo: sufficient increase constant.
        max_backtracks: step halvings per iteration.
        tol: relative gain below which all restarts count as converged.
        verbose: log the best ratio at every iteration.

    Returns:
        The final points and their ratios.
    """
    x = x0.to(DTYPE)
    if support is not None:
        support = support.to(DTYPE)
        x = x * support
    x = _normalize(objective, x)
    batch = x.shape[0]
    step = torch.full((batch,), float(initial_step), dtype=DTYPE)
    shape = (-1,) + (1,) * (x.dim() - 1)
    with torch.no_grad():
        value = _ratio(objective, x)
    for it in range(iterations):
        xg = x.clone().requires_grad_(True)
        (grad,) = torch.autograd.grad(_ratio(objective, xg).sum(), xg)
        if support is not None:
            grad = grad * support
        grad_sq = grad.pow(2).flatten(1).sum(-1)
        accepted = ~(grad_sq > 0)
        trial = step * 2
        new_x, new_value = x.clone(), value.clone()
        with torch.no_grad():
            for _ in range(max_backtracks):
                cand = _normalize(objective, x + trial.reshape(shape) * grad)
                cand_value = _ratio(objective, cand)
                ok = ~accepted & (cand_value >= value + armijo * trial * grad_sq)
                new_x[ok] = cand[ok]
                new_value[ok] = cand_value[ok]
                step[ok] = trial[ok]
                accepted |= ok
                if bool(accepted.all()):
                    break
                trial = torch.where(accepted, trial, trial / 2)
        step = torch.where(accepted, step, trial)
        gain = new_value - value
        x, value = new_x, new_value
        if verbose:
            logger.debug(f"iteration {it}: best ratio {float(value.max()):.12g}")
        if bool((gain <= tol * value.abs()).all()):
            break
    return x, value


def maximize_ratio(
    objective: Objective,
    shape: Sequence[int],
    restarts: int = 64,
    iterations: int = 200,
    seed: int = 0,
    support: Optional[torch.Tensor] = None,
    initial: Optional[torch.Tensor] = None,
    verbose: bool = False,
) -> tuple[torch.Tensor, float, torch.Tensor]:
    """Run `projected_ascent` from random and supplied starts.

    Args:
        objective: batched (num, den) functional.
        shape: shape of one point.
        restarts: number of random starts.
        iterations: ascent steps per start.
        seed: base seed of the per-restart generators.
        support: optional 0/1 mask.
        initial: optional extra starts of shape (k, *shape).
        verbose: per iteration debug logging.

    Returns:
        The best point, its ratio and the ratios of all starts.
    """
    if restarts <= 0 or iterations < 0:
        raise ValueError(
            f"invalid-budget: restarts must be > 0 and iterations >= 0, "
            f"found {restarts} and {iterations}"
        )
    starts = random_starts(shape, restarts, seed)
    if initial is not None:
        starts = torch.cat([starts, initial.to(DTYPE).reshape(-1, *shape)])
    x, values = projected_ascent(
        objective, starts, iterations, support=support, verbose=verbose
    )
    best = int(torch.argmax(values))
    logger.info(
        f"Best ratio {float(values[best]):.9g} over {starts.shape[0]} starts "
        f"(seed {seed})"
    )
    return x[best].detach(), float(values[best]), values


def rayleigh_ratio(op: LinearHaarOperator, f: HaarExpansion, p: float) -> float:
    """Recompute ‖op f‖_p / ‖f‖_p from scratch."""
    return lp_norm(op(f), p) / lp_norm(f, p)


def operator_norm_search(
    op: LinearHaarOperator,
    p: float,
    restarts: int = 64,
    iterations: int = 200,
    seed: int = 0,
    support: Optional[torch.Tensor] = None,
    initial: Optional[Sequence[HaarExpansion]] = None,
    verbose: bool = False,
) -> NormEstimate:
    """Lower bound of ‖op: L^p_{X,0} → L^p_Y‖ with a recheckable witness.

    Args:
        op: a coefficientwise linear operator.
        p: the exponent.
        restarts: number of random restarts.
        iterations: ascent steps per restart.
        seed: base seed.
        support: optional (n, 1) or (n, d) 0/1 mask of admissible coefficients.
        initial: optional expansions used as extra starts.
        verbose: per iteration debug logging.

    Returns:
        A `lower_bound` estimate whose value is the ratio of its witness.
    """
    n, d = n_intervals(op.source_depth), op.source_space.d
    extra = None
    if initial:
        extra = torch.stack([f.extend(op.source_depth).coeffs for f in initial])

    def objective(x):
        return op.ratio_terms(x, p)

    best, _, _ = maximize_ratio(
        objective, (n, d), restarts, iterations, seed, support, extra, verbose
    )
    witness = HaarExpansion(op.source_depth, op.source_space, coeffs=best)
    value = rayleigh_ratio(op, witness, p)
    return NormEstimate(
        value,
        "lower_bound",
        restarts=restarts,
        iterations=iterations,
        seed=seed,
        witness=witness,
        meta={"p": p},
    )


def power_iteration(
    matrix: torch.Tensor,
    max_iter: int = 1000,
    tol: float = 1e-13,
    seed: int = 0,
    alert: bool = False,
) -> tuple[float, torch.Tensor]:
    """Use power iteration on M^T M to calculate the spectral norm of a matrix.

    Args:
        matrix: dense matrix M.
        max_iter: maximum number of iterations.
        tol: relative stopping tolerance.
        seed: seed of the initial vector.
        alert: log convergence information.

    Returns:
        The spectral norm and the principal right singular vector.
    """
    x = torch.randn(matrix.shape[1], generator=restart_generator(seed, 0), dtype=DTYPE)
    x = x / torch.linalg.vector_norm(x)
    ratio_old = float("inf")
    for it in range(max_iter):
        ax = matrix @ x
        ratio = float(torch.linalg.vector_norm(ax))
        if ratio == 0 or abs(ratio - ratio_old) / ratio < tol:
            if alert:
                logger.info(f"Power iteration converged after {it + 1} iterations.")
            break
        ratio_old = ratio
        x = matrix.T @ ax
        x = x / torch.linalg.vector_norm(x)
    sig1 = float(torch.linalg.vector_norm(matrix @ x))
    if alert:
        logger.info(f"The spectral norm is {sig1}.")
    return sig1, x


def _orthonormal_scales(depth: int, d: int) -> torch.Tensor:
    """Get |I|^(1/2) for every flattened (position, component) coordinate."""
    n = n_intervals(depth)
    levels = torch.tensor([(j + 1).bit_length() - 1 for j in range(n)])
    return (2.0 ** (-levels.to(DTYPE) / 2)).repeat_interleave(d)


def operator_norm_exact_small(
    op: LinearHaarOperator,
    p: float,
    cap: int = 64,
    restarts: int = 16,
    iterations: int = 200,
    seed: int = 0,
) -> NormEstimate:
    """Norm of an operator with few coefficients.

    For p = 2 between Hilbert spaces (scalars or ℓ_2^d) the Haar system is
    orthogonal, so the norm is the largest singular value of the operator in
    the coordinates a_I |I|^(1/2); it is cross checked by power iteration.
    Otherwise a dense multi-start search with four times the budget is run and
    reported as a lower bound.

    Args:
        op: a coefficientwise linear operator.
        p: the exponent.
        cap: maximal number of scalar coefficients n * d.
        restarts: base number of restarts; the dense search runs four times as
            many, 64 by default.
        iterations: base number of iterations for the dense search.
        seed: base seed.

    Returns:
        The estimate.
    """
    if restarts <= 0 or iterations <= 0:
        raise ValueError("invalid-budget: restarts and iterations must be > 0")
    d_in = op.source_space.d
    size = n_intervals(op.source_depth) * d_in
    if size > cap:
        raise ValueError(f"too-large: {size} coefficients exceed the cap of {cap}")
    if p == 2 and op.source_space.is_hilbert and op.target_space.is_hilbert:
        src = _orthonormal_scales(op.source_depth, d_in)
        tgt = _orthonormal_scales(op.target_depth, op.target_space.d)
        matrix = tgt.unsqueeze(-1) * op.dense_matrix() / src.unsqueeze(0)
        value = float(torch.linalg.matrix_norm(matrix, ord=2))
        check, _ = power_iteration(matrix, seed=seed)
        vector = torch.linalg.svd(matrix, full_matrices=False).Vh[0]
        if abs(check - value) > 1e-6 * max(value, 1.0):
            warnings.warn(
                f"Power iteration gave {check} but the spectral norm is {value}"
            )
        witness = HaarExpansion(
            op.source_depth,
            op.source_space,
            coeffs=(vector / src).reshape(-1, d_in),
        )
        return NormEstimate(
            value,
            "exact",
            seed=seed,
            witness=witness,
            meta={"p": p, "power_iteration": check},
        )
    estimate = operator_norm_search(op, p, 4 * restarts, 4 * iterations, seed)
    estimate.meta["dense"] = True
    return estimate


def check_gradient(
    fn: Callable[[torch.Tensor], torch.Tensor],
    points: torch.Tensor,
    eps: float = 1e-6,
    rtol: float = 1e-4,
    atol: float = 1e-8,
    seed: int = 0,
) -> CheckReport:
    """Compare autograd directional derivatives with central differences.

    Args:
        fn: maps a batch of points (R, ...) to values (R,).
        points: the evaluation points.
        eps: finite difference step.
        rtol: relative tolerance.
        atol: absolute tolerance for near zero derivatives.
        seed: seed of the random directions.

    Returns:
        A report with the worst relative error as `lhs` and `rtol` as `rhs`.
    """
    x = points.to(DTYPE).clone().requires_grad_(True)
    (grad,) = torch.autograd.grad(fn(x).sum(), x)
    gen = restart_generator(seed, 0)
    v = torch.randn(*x.shape, generator=gen, dtype=DTYPE)
    v = v / torch.linalg.vector_norm(v.flatten(1), dim=-1).reshape(-1, *([1] * (x.dim() - 1)))
    with torch.no_grad():
        numeric = (fn(x + eps * v) - fn(x - eps * v)) / (2 * eps)
    analytic = (grad * v).flatten(1).sum(-1)
    error = (numeric - analytic).abs()
    scale = torch.maximum(numeric.abs(), analytic.abs())
    relative = error / torch.clamp(scale, min=atol)
    passed = bool(((error <= atol) | (relative <= rtol)).all())
    worst = int(torch.argmax(relative))
    return CheckReport(
        "gradient",
        float(relative.max()),
        rtol,
        passed,
        details={"points": x.shape[0], "eps": eps},
        counterexample=None
        if passed
        else {"point": worst, "numeric": float(numeric[worst]), "analytic": float(analytic[worst])},
    )
