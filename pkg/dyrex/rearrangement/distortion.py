"""Distortion of Carleson constants under a rearrangement."""

import attrs
import logging
import numpy as np
from fractions import Fraction
from typing import Iterable
from dyrex.io.interval import DyadicInterval, IntervalCollection
from dyrex.io.rearrangement_map import RearrangementMap
from dyrex.io.estimate import RatioCertificate
from dyrex.dyadic import carleson_constant, tree_packing_max

logger = logging.getLogger(__name__)

INCLUSION_PROBABILITIES = (0.05, 0.1, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95)


@attrs.define
class DistortionResult:
    """Both Carleson distortion ratios of a map.

    Attributes:
        forward: sup_E ⟦τ(E)⟧ / ⟦E⟧ with its witness E.
        backward: sup_E ⟦E⟧ / ⟦τ(E)⟧ with its witness E.
    """

    forward: RatioCertificate
    backward: RatioCertificate

    def to_dict(self) -> dict:
        """Convert to JSON-ready data."""
        return {"forward": self.forward.to_dict(), "backward": self.backward.to_dict()}


def carleson_image(tau: RearrangementMap, collection: Iterable[DyadicInterval]) -> Fraction:
    """Get ⟦τ(E)⟧ exactly."""
    return carleson_constant(tau.image(IntervalCollection(collection)))


def _flags(positions: Iterable[int], size: int) -> list[bool]:
    """Membership flags of a set of BFS positions."""
    flags = [False] * size
    for pos in positions:
        flags[pos] = True
    return flags


class _Tracker:
    """Keep the best forward and backward ratios with canonical tie breaking."""

    def __init__(self):
        """Start with empty maxima."""
        self.best = {"forward": (Fraction(0), None), "backward": (Fraction(0), None)}

    def offer(self, side: str, value: Fraction, bits: list[int]) -> None:
        """Record a candidate ratio with its sorted source positions."""
        current, current_bits = self.best[side]
        if value > current or (value == current and (current_bits is None or bits < current_bits)):
            self.best[side] = (value, bits)

    def certificate(self, side: str, kind: str, meta: dict) -> RatioCertificate:
        """Convert a maximum into a certificate."""
        value, bits = self.best[side]
        witness = IntervalCollection(DyadicInterval.from_bfs_index(j) for j in bits or [])
        return RatioCertificate(value, witness, kind, meta=dict(meta))


def carleson_distortion(
    tau: RearrangementMap,
    mode: str = "exact",
    cap: int = 15,
    samples: int = 200,
    seed: int = 0,
) -> DistortionResult:
    """Get (sup ⟦τ(E)⟧/⟦E⟧, sup ⟦E⟧/⟦τ(E)⟧) over non-empty E ⊆ D_0^N.

    Exact mode enumerates every E and needs a bijection on D_0^N. Sampled mode
    draws random E with inclusion probabilities swept over
    `INCLUSION_PROBABILITIES`, adds every shadow Q(I), and returns certified
    lower bounds.

    Args:
        tau: the rearrangement.
        mode: `exact` or `sampled`.
        cap: maximal |D_0^N| for exact mode.
        samples: random collections per inclusion probability.
        seed: seed of `numpy.random.default_rng`.

    Returns:
        A `DistortionResult`.
    """
    source_depth, target_depth = tau.source_depth, tau.target_depth
    n = 2 ** (source_depth + 1) - 1
    n_target = 2 ** (target_depth + 1) - 1
    targets = [tau(DyadicInterval.from_bfs_index(j)).bfs_index for j in range(n)]
    tracker = _Tracker()

    def evaluate(bits: list[int]) -> None:
        source = tree_packing_max(_flags(bits, n), source_depth)
        image = tree_packing_max(_flags((targets[j] for j in bits), n_target), target_depth)
        # both are integers in units of 2^-depth of their own grid
        ratio = Fraction(image * 2**source_depth, source * 2**target_depth)
        tracker.offer("forward", ratio, bits)
        tracker.offer("backward", 1 / ratio, bits)

    if mode == "exact":
        if not tau.is_bijective:
            raise ValueError("domain-mismatch: exact Carleson distortion needs a bijection")
        if n > cap:
            raise ValueError(
                f"too-large: {n} intervals exceed the exact search cap of {cap}"
            )
        for subset in range(1, 1 << n):
            evaluate([j for j in range(n) if subset >> j & 1])
        kind, meta = "exact", {"collections": (1 << n) - 1}
    elif mode == "sampled":
        if samples <= 0:
            raise ValueError("invalid-budget: samples must be > 0")
        rng = np.random.default_rng(seed)
        for prob in INCLUSION_PROBABILITIES:
            for _ in range(samples):
                bits = np.flatnonzero(rng.random(n) < prob).tolist()
                if bits:
                    evaluate(bits)
        for root in range(n):
            evaluate(_shadow_positions(root, n))
        kind = "lower_bound"
        meta = {"samples": samples, "seed": seed, "probabilities": list(INCLUSION_PROBABILITIES)}
    else:
        raise ValueError(f"Unknown mode '{mode}', expected exact or sampled")
    result = DistortionResult(
        tracker.certificate("forward", kind, meta), tracker.certificate("backward", kind, meta)
    )
    logger.info(
        f"Carleson distortion ({mode}): forward {result.forward.value}, "
        f"backward {result.backward.value}"
    )
    return result


def _shadow_positions(root: int, n: int) -> list[int]:
    """BFS positions of the subtree below `root` within the first n positions."""
    out, frontier = [], [root]
    while frontier:
        out.extend(frontier)
        frontier = [c for p in frontier for c in (2 * p + 1, 2 * p + 2) if c < n]
    return sorted(out)
