"""Exact and heuristic computation of the Semenov ratio sup_C |τ(C)*| / |C*|."""

import math
import logging
import numpy as np
from fractions import Fraction
from typing import Iterable
from dyrex.io.interval import DyadicInterval, IntervalCollection
from dyrex.io.rearrangement_map import RearrangementMap
from dyrex.io.estimate import RatioCertificate
from dyrex.dyadic import cell_mask, union_measure, shadow

logger = logging.getLogger(__name__)


def _require_measure_preserving(tau: RearrangementMap) -> None:
    """Raise unless τ preserves measure."""
    if not tau.measure_preserving:
        raise ValueError("domain-mismatch: Semenov ratios need a measure preserving map")


def semenov_ratio(tau: RearrangementMap, collection: Iterable[DyadicInterval]) -> Fraction:
    """Get |τ(C)*| / |C*| exactly.

    Args:
        tau: the rearrangement.
        collection: a non-empty collection C in the domain of τ.

    Returns:
        The exact ratio.
    """
    collection = IntervalCollection(collection)
    return union_measure(tau.image(collection)) / union_measure(collection)


def _masks(tau: RearrangementMap) -> tuple[list[int], list[int]]:
    """Cell bitmasks of every source and its image at resolution 2^-N, BFS order."""
    depth = tau.source_depth
    sources = [DyadicInterval.from_bfs_index(j) for j in range(2 ** (depth + 1) - 1)]
    return (
        [cell_mask(s, depth) for s in sources],
        [cell_mask(tau(s), depth) for s in sources],
    )


def _bits(subset: int) -> list[int]:
    """Positions of the set bits of `subset`, increasing."""
    out = []
    while subset:
        low = subset & -subset
        out.append(low.bit_length() - 1)
        subset ^= low
    return out


def _collection(bits: Iterable[int]) -> IntervalCollection:
    """Convert BFS positions to a collection."""
    return IntervalCollection(DyadicInterval.from_bfs_index(j) for j in bits)


def _better(num: int, den: int, best_num: int, best_den: int) -> int:
    """Compare num/den with best_num/best_den: 1 larger, 0 equal, -1 smaller."""
    lhs, rhs = num * best_den, best_num * den
    return (lhs > rhs) - (lhs < rhs)


def semenov_exact(tau: RearrangementMap, cap: int = 15) -> RatioCertificate:
    """Get max over non-empty C ⊆ D_0^N of |τ(C)*| / |C*| by full enumeration.

    Subsets are enumerated as bitmasks; unions are built incrementally as cell
    bitmasks so that every subset costs O(1) big integer operations. Ties are
    broken by the smallest canonical collection.

    Args:
        tau: measure preserving rearrangement on D_0^N.
        cap: maximal number of intervals |D_0^N|.

    Returns:
        The exact Semenov constant of τ with a maximizing collection.
    """
    _require_measure_preserving(tau)
    n = 2 ** (tau.source_depth + 1) - 1
    if n > cap:
        raise ValueError(
            f"too-large: {n} intervals exceed the exact search cap of {cap}; "
            f"use semenov_heuristic"
        )
    source_masks, image_masks = _masks(tau)
    union = [0] * (1 << n)
    image = [0] * (1 << n)
    best_num, best_den, best_bits = 0, 1, []
    for subset in range(1, 1 << n):
        low = subset & -subset
        j = low.bit_length() - 1
        rest = subset ^ low
        union[subset] = union[rest] | source_masks[j]
        image[subset] = image[rest] | image_masks[j]
        num, den = image[subset].bit_count(), union[subset].bit_count()
        cmp = _better(num, den, best_num, best_den)
        if cmp > 0:
            best_num, best_den, best_bits = num, den, _bits(subset)
        elif cmp == 0:
            bits = _bits(subset)
            if bits < best_bits:
                best_bits = bits
    value = Fraction(best_num, best_den)
    logger.info(f"Exact Semenov constant {value} over {(1 << n) - 1} collections")
    return RatioCertificate(
        value, _collection(best_bits), "exact", meta={"collections": (1 << n) - 1}
    )


def shadow_semenov(tau: RearrangementMap) -> RatioCertificate:
    """Get max_I |τ(Q(I) ∩ D_0^N)*| / |I| exactly in one bottom-up pass.

    Taking C = Q(I) shows this is a lower bound of the Semenov constant.

    Args:
        tau: measure preserving rearrangement on D_0^N.

    Returns:
        The exact value with the maximizing shadow as witness.
    """
    _require_measure_preserving(tau)
    depth = tau.source_depth
    n = 2 ** (depth + 1) - 1
    _, image_masks = _masks(tau)
    shadow_union = list(image_masks)
    best_num, best_den, best_pos = 0, 1, 0
    for pos in range(n - 1, -1, -1):
        if 2 * pos + 2 < n:
            shadow_union[pos] |= shadow_union[2 * pos + 1] | shadow_union[2 * pos + 2]
        level = (pos + 1).bit_length() - 1
        num, den = shadow_union[pos].bit_count(), 2 ** (depth - level)
        if _better(num, den, best_num, best_den) >= 0:
            best_num, best_den, best_pos = num, den, pos
    root = DyadicInterval.from_bfs_index(best_pos)
    return RatioCertificate(
        Fraction(best_num, best_den), shadow(root, depth), "exact", meta={"root": str(root)}
    )


def _greedy(
    start: int, source_masks: list[int], image_masks: list[int]
) -> tuple[int, int, int]:
    """Grow a collection from `start` by adding the best improving interval.

    Returns:
        `(subset, image_cells, union_cells)` of the final collection.
    """
    n = len(source_masks)
    subset = start
    union = image = 0
    for j in _bits(start):
        union |= source_masks[j]
        image |= image_masks[j]
    while True:
        best = None
        num, den = image.bit_count(), union.bit_count()
        for j in range(n):
            if subset >> j & 1:
                continue
            cand_num = (image | image_masks[j]).bit_count()
            cand_den = (union | source_masks[j]).bit_count()
            if _better(cand_num, cand_den, num, den) > 0:
                num, den, best = cand_num, cand_den, j
        if best is None:
            return subset, image.bit_count(), union.bit_count()
        subset |= 1 << best
        union |= source_masks[best]
        image |= image_masks[best]


def _anneal(
    start: int,
    source_masks: list[int],
    image_masks: list[int],
    steps: int,
    rng: np.random.Generator,
    initial_temp: float = 0.5,
    final_temp: float = 1e-3,
) -> tuple[int, int, int]:
    """Simulated annealing over inclusion vectors with single bit flips.

    Returns:
        The best `(subset, image_cells, union_cells)` visited.
    """
    n = len(source_masks)

    def evaluate(subset: int) -> tuple[int, int]:
        union = image = 0
        for j in _bits(subset):
            union |= source_masks[j]
            image |= image_masks[j]
        return image.bit_count(), union.bit_count()

    current = start
    cur_num, cur_den = evaluate(current)
    best, best_num, best_den = current, cur_num, cur_den
    cooling = (final_temp / initial_temp) ** (1.0 / max(steps, 1))
    temp = initial_temp
    for _ in range(steps):
        candidate = current ^ (1 << int(rng.integers(n)))
        if candidate == 0:
            continue
        num, den = evaluate(candidate)
        delta = num / den - cur_num / cur_den
        if delta >= 0 or rng.random() < math.exp(delta / temp):
            current, cur_num, cur_den = candidate, num, den
            cmp = _better(num, den, best_num, best_den)
            if cmp > 0 or (cmp == 0 and _bits(current) < _bits(best)):
                best, best_num, best_den = current, num, den
        temp *= cooling
    return best, best_num, best_den


def semenov_heuristic(
    tau: RearrangementMap,
    restarts: int = 4,
    anneal_steps: int = 2000,
    seed: int = 0,
) -> RatioCertificate:
    """Certified lower bound of the Semenov constant.

    Runs greedy growth from every singleton and every shadow, then simulated
    annealing from the best greedy results. The returned value is the exactly
    recomputed ratio of the returned witness.

    Args:
        tau: measure preserving rearrangement.
        restarts: number of annealing runs.
        anneal_steps: bit flips per annealing run.
        seed: seed of `numpy.random.default_rng`.

    Returns:
        A `lower_bound` certificate.
    """
    _require_measure_preserving(tau)
    if restarts <= 0 or anneal_steps < 0:
        raise ValueError("invalid-budget: restarts must be > 0 and anneal_steps >= 0")
    source_masks, image_masks = _masks(tau)
    n = len(source_masks)
    shadow_cert = shadow_semenov(tau)
    starts = [1 << j for j in range(n)]
    starts.append(sum(1 << m.bfs_index for m in shadow_cert.witness))
    results = [_greedy(s, source_masks, image_masks) for s in starts]
    results.sort(key=lambda r: (-Fraction(r[1], r[2]), _bits(r[0])))
    rng = np.random.default_rng(seed)
    for start in [r[0] for r in results[:restarts]]:
        results.append(_anneal(start, source_masks, image_masks, anneal_steps, rng))
    best = results[0]
    for cand in results[1:]:
        cmp = _better(cand[1], cand[2], best[1], best[2])
        if cmp > 0 or (cmp == 0 and _bits(cand[0]) < _bits(best[0])):
            best = cand
    witness = _collection(_bits(best[0]))
    value = semenov_ratio(tau, witness)
    if value < shadow_cert.value:
        value, witness = shadow_cert.value, shadow_cert.witness
    logger.info(f"Semenov lower bound {value} from {len(results)} searches")
    return RatioCertificate(
        value,
        witness,
        "lower_bound",
        meta={"restarts": restarts, "anneal_steps": anneal_steps, "seed": seed},
    )
