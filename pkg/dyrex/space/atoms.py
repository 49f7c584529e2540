"""Atoms of H^1_X: validation, construction and atomic norm upper bounds."""

import math
import logging
import numpy as np
import torch
from typing import Iterable
from dyrex.io.interval import DyadicInterval
from dyrex.io.expansion import HaarExpansion, StoppingTimeGrid, Atom
from dyrex.io.estimate import CheckReport
from dyrex.io.space_spec import SpaceSpec, DTYPE
from dyrex.space.transform import project

logger = logging.getLogger(__name__)


def validate_atom(atom: Atom, tol: float = 1e-12) -> CheckReport:
    """Check the two atom conditions on the grid.

    (a) E(a | F_n) = 0 on {n <= ν} for n = 0..N+1, which includes a = 0 on {ν = ∞}.
    (b) ‖a‖_{L^∞_X} P(ν < ∞) <= 1.

    Args:
        atom: the candidate atom.
        tol: absolute tolerance for both conditions.

    Returns:
        A report whose `details["clause"]` names the first violated clause
        (`"a"` with the offending level, or `"b"`), and whose `lhs`/`rhs` are
        the two sides of (b).
    """
    values = atom.expansion.values()
    space = atom.expansion.space
    nu = atom.nu.values
    sup_norm = float(space.norm(values).max())
    stopped = atom.nu.stopped_measure()
    lhs = sup_norm * stopped
    for n in range(atom.expansion.depth + 2):
        on_event = nu >= n
        norms = space.norm(project(values, n))[on_event]
        if len(norms) and float(norms.max()) > tol:
            cell = int(torch.nonzero(on_event).flatten()[int(norms.argmax())])
            return CheckReport(
                "atom",
                lhs,
                1.0,
                False,
                details={"clause": "a", "level": n},
                counterexample={"cell": cell, "value": float(norms.max())},
            )
    if lhs > 1.0 + tol:
        return CheckReport(
            "atom",
            lhs,
            1.0,
            False,
            details={"clause": "b", "sup_norm": sup_norm, "stopped_measure": stopped},
        )
    return CheckReport(
        "atom",
        lhs,
        1.0,
        True,
        details={"clause": None, "sup_norm": sup_norm, "stopped_measure": stopped},
    )


def h1at_upper_bound(
    f: HaarExpansion,
    decomposition: Iterable[tuple[float, Atom]],
    tol: float = 1e-9,
) -> float:
    """Certify Σ |μ_k| as an upper bound of ‖f‖_{H^{1,at}_X}.

    Args:
        f: the decomposed function.
        decomposition: pairs (μ_k, a_k) of weights and valid atoms.
        tol: cellwise tolerance of the reconstruction Σ μ_k a_k = f.

    Returns:
        Σ |μ_k|.
    """
    target = f.values()
    total = torch.zeros_like(target)
    bound = 0.0
    for k, (mu, atom) in enumerate(decomposition):
        report = validate_atom(atom)
        if not report.passed:
            raise ValueError(
                f"Atom {k} of the decomposition violates clause {report.details['clause']}"
            )
        if atom.expansion.depth != f.depth:
            raise ValueError(
                f"invalid-depth: atom {k} has depth {atom.expansion.depth}, "
                f"expected {f.depth}"
            )
        total = total + float(mu) * atom.expansion.values()
        bound += abs(float(mu))
    error = float((total - target).abs().max()) if target.numel() else 0.0
    if error > tol:
        raise ValueError(
            f"mismatch: decomposition differs from f by {error:.3g} on the grid"
        )
    return bound


def simple_atom(interval: DyadicInterval, depth: int, space: SpaceSpec = None) -> Atom:
    """Get the atom h_J / |J| with ν = level(J) on J and ∞ elsewhere."""
    interval = DyadicInterval.coerce(interval)
    space = space or SpaceSpec.scalar()
    expansion = HaarExpansion.haar(
        interval,
        depth,
        space,
        vector=torch.full((space.d,), float(2**interval.level), dtype=DTYPE)
        / _unit_norm(space),
    )
    return Atom(expansion, StoppingTimeGrid.hitting([interval], depth))


def _unit_norm(space: SpaceSpec) -> float:
    """Norm of the all-ones vector of X."""
    return float(space.norm(torch.ones(space.d, dtype=DTYPE)))


def _disjoint_intervals(
    rng: np.random.Generator, depth: int, count: int
) -> list[DyadicInterval]:
    """Draw up to `count` pairwise disjoint intervals of level <= depth."""
    chosen: list[DyadicInterval] = []
    for _ in range(20 * count):
        if len(chosen) == count:
            break
        level = int(rng.integers(0, depth + 1))
        candidate = DyadicInterval(level, int(rng.integers(0, 2**level)))
        if all(not c.contains(candidate) and not candidate.contains(c) for c in chosen):
            chosen.append(candidate)
    return chosen


def build_atom(
    depth: int,
    space: SpaceSpec = None,
    seed: int = 0,
    max_parts: int = 3,
    fill: float = None,
) -> Atom:
    """Construct a random valid atom.

    The atom is supported on disjoint intervals J_1, ..., J_m with ν = level(J_j)
    on J_j and ∞ elsewhere. On each J_j it is a random combination of Haar
    functions h_K with K ⊆ J_j, so it has mean zero on J_j. It is scaled so
    that ‖a‖_∞ P(ν < ∞) equals `fill`.

    Args:
        depth: expansion depth N.
        space: coefficient space.
        seed: seed of the random draws.
        max_parts: maximal number m of support intervals.
        fill: value of ‖a‖_∞ P(ν < ∞) in (0, 1], random if None.

    Returns:
        The atom.
    """
    space = space or SpaceSpec.scalar()
    rng = np.random.default_rng(seed)
    parts = _disjoint_intervals(rng, depth, int(rng.integers(1, max_parts + 1)))
    f = HaarExpansion.zeros(depth, space)
    for part in parts:
        for level in range(part.level, depth + 1):
            for sub in part.subintervals(level):
                if rng.random() < 0.6 or sub == part:
                    f.coeffs[sub.bfs_index] = torch.as_tensor(
                        rng.standard_normal(space.d), dtype=DTYPE
                    )
    nu = StoppingTimeGrid.hitting(parts, depth)
    sup_norm = float(space.norm(f.values()).max())
    if sup_norm == 0:
        return Atom(f, StoppingTimeGrid.constant(depth))
    fill = float(rng.uniform(0.2, 1.0)) if fill is None else fill
    scale = fill / (sup_norm * nu.stopped_measure())
    logger.debug(f"Built atom on {[str(p) for p in parts]} with scale {scale:.3g}")
    return Atom(f.scale(scale), nu)


def expectation_norm(f: HaarExpansion) -> float:
    """Get E‖f‖_X = ‖f‖_{L^1_X}."""
    return float(f.space.norm(f.values()).mean())


def atomic_combination(
    atoms: list[Atom], weights: Iterable[float]
) -> tuple[HaarExpansion, list[tuple[float, Atom]]]:
    """Form f = Σ μ_k a_k together with its decomposition.

    Args:
        atoms: valid atoms of a common depth.
        weights: the coefficients μ_k.

    Returns:
        The pair (f, decomposition).
    """
    weights = [float(w) for w in weights]
    if len(weights) != len(atoms) or not atoms:
        raise ValueError("Need one weight per atom and at least one atom")
    f = atoms[0].expansion.scale(weights[0])
    for mu, atom in zip(weights[1:], atoms[1:]):
        f = f + atom.expansion.scale(mu)
    if not math.isfinite(float(f.coeffs.abs().sum())):
        raise ValueError("Atomic combination is not finite")
    return f, list(zip(weights, atoms))
