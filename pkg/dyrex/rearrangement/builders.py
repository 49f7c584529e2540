"""Builders for the example rearrangements of dyadic intervals."""

import attrs
import logging
import numpy as np
from typing import Iterable, Union
from dyrex.io.interval import DyadicInterval, IntervalCollection
from dyrex.io.rearrangement_map import RearrangementMap

logger = logging.getLogger(__name__)


def _identity_table(depth: int) -> dict[DyadicInterval, DyadicInterval]:
    """Get the identity table on D_0^N."""
    return {
        DyadicInterval(k, i): DyadicInterval(k, i)
        for k in range(depth + 1)
        for i in range(2**k)
    }


def build_identity(depth: int) -> RearrangementMap:
    """Get τ(I) = I on D_0^N."""
    if depth < 0:
        raise ValueError(f"invalid-depth: depth must be >= 0, found {depth}")
    return RearrangementMap(depth, depth, _identity_table(depth))


def build_parity_shift(depth: int) -> RearrangementMap:
    """Get the parity shift: even levels fixed, odd levels swapped between halves.

    An odd level interval I ⊆ [0, 1/2) goes to I + 1/2 and one in [1/2, 1) to
    I - 1/2. The map is a measure preserving involution.

    Args:
        depth: truncation depth N.

    Returns:
        The map on D_0^N.
    """
    if depth < 0:
        raise ValueError(f"invalid-depth: depth must be >= 0, found {depth}")
    table = _identity_table(depth)
    for k in range(1, depth + 1, 2):
        half = 2 ** (k - 1)
        for i in range(2**k):
            table[DyadicInterval(k, i)] = DyadicInterval(k, i + half if i < half else i - half)
    return RearrangementMap(depth, depth, table)


@attrs.frozen
class BlockPermutation:
    """A block permutation with the data needed to build structured witnesses.

    Attributes:
        map: the rearrangement on D_0^N.
        blocks: the blocks I_0, ..., I_n.
        families: the collections A_1, ..., A_n (truncated to D_0^N).
    """

    map: RearrangementMap
    blocks: tuple[DyadicInterval, ...]
    families: tuple[IntervalCollection, ...]

    @property
    def n(self) -> int:
        """Get the number n of shifted families."""
        return len(self.blocks) - 1


def _check_blocks(blocks: list[DyadicInterval], depth: int) -> None:
    """Validate blocks: at least two, one level, pairwise distinct, inside the grid."""
    if len(blocks) < 2:
        raise ValueError(f"invalid-blocks: need at least 2 blocks, found {len(blocks)}")
    levels = {b.level for b in blocks}
    if len(levels) != 1:
        raise ValueError(f"invalid-blocks: blocks have unequal levels {sorted(levels)}")
    if len(set(blocks)) != len(blocks):
        raise ValueError("invalid-blocks: blocks overlap")
    if blocks[0].level > depth:
        raise ValueError(
            f"invalid-blocks: block level {blocks[0].level} deeper than depth {depth}"
        )


def _block_table(
    table: dict[DyadicInterval, DyadicInterval],
    blocks: list[DyadicInterval],
    depth: int,
) -> list[list[DyadicInterval]]:
    """Write the block permutation on `blocks` into `table` and return A_1..A_n.

    For J ⊆ I_j with |J| = 2^-s |I_j| and 1 <= s <= n: J goes to the same position
    in I_0 if s = j, to I_{j+1} if s > j, and stays if s < j.
    """
    n = len(blocks) - 1
    m = blocks[0].level
    families: list[list[DyadicInterval]] = [[] for _ in range(n)]
    for j, block in enumerate(blocks):
        for s in range(1, n + 1):
            if m + s > depth:
                break
            width = 2**s
            for offset in range(width):
                source = DyadicInterval(m + s, block.index * width + offset)
                if s == j:
                    target_block = blocks[0]
                    families[s - 1].append(source)
                elif s > j:
                    target_block = blocks[j + 1]
                else:
                    continue
                table[source] = DyadicInterval(m + s, target_block.index * width + offset)
    return families


def build_block_perm(
    blocks: Iterable[Union[DyadicInterval, str]], depth: int
) -> BlockPermutation:
    """Build the block permutation τ_n on blocks I_0, ..., I_n.

    (i) A_k = {I ⊆ I_k : |I| = 2^-k |I_k|} is shifted from I_k to I_0;
    (ii) subintervals of I_0 of length 2^-k |I_0|, k = 1..n, are shifted to I_1;
    (iii) subintervals of I_j of length 2^-k |I_j|, k = j+1..n, are shifted to
    I_{j+1}; the map is the identity elsewhere.

    Args:
        blocks: disjoint dyadic intervals I_0, ..., I_n of equal length.
        depth: truncation depth N; intervals below level N are omitted.

    Returns:
        The `BlockPermutation` holding the map and the families A_k.
    """
    blocks = [DyadicInterval.coerce(b) for b in blocks]
    _check_blocks(blocks, depth)
    table = _identity_table(depth)
    families = _block_table(table, blocks, depth)
    return BlockPermutation(
        RearrangementMap(depth, depth, table),
        tuple(blocks),
        tuple(IntervalCollection(f) for f in families),
    )


def glued_family_blocks(n: int) -> list[DyadicInterval]:
    """Get the blocks I_0^n, ..., I_n^n of family n of the glued permutation.

    Family n lives in the host H_n = [1 - 2^(1-n), 1 - 2^-n), the interval
    `(n, 2^n - 2)`. Its n + 1 blocks are the first intervals of level
    n + ceil(log2(n + 1)) inside H_n.

    Args:
        n: the family index, n >= 1.

    Returns:
        The blocks in order.
    """
    if n < 1:
        raise ValueError(f"Family index must be >= 1, found {n}")
    # ceil(log2(n + 1)) == n.bit_length()
    level = n + n.bit_length()
    host = DyadicInterval(n, 2**n - 2)
    first = host.index * 2 ** (level - n)
    return [DyadicInterval(level, first + j) for j in range(n + 1)]


def glued_depth(n: int) -> int:
    """Get the smallest depth containing every family A_k of glued family n."""
    return glued_family_blocks(n)[0].level + n


def build_glued_blocks(depth: int) -> RearrangementMap:
    """Glue the block permutations τ_1, τ_2, ... into one map on D_0^N.

    Family n sits inside (n, 2^n - 2); families whose blocks lie at or below
    level N are omitted and deeper parts of the others are truncated.

    Args:
        depth: truncation depth N.

    Returns:
        The measure preserving bijection on D_0^N.
    """
    if depth < 0:
        raise ValueError(f"invalid-depth: depth must be >= 0, found {depth}")
    table = _identity_table(depth)
    n = 1
    while True:
        blocks = glued_family_blocks(n)
        if blocks[0].level >= depth:
            break
        _block_table(table, blocks, depth)
        n += 1
    logger.debug(f"Glued {n - 1} block families at depth {depth}")
    return RearrangementMap(depth, depth, table)


def glued_families(depth: int, n: int) -> BlockPermutation:
    """Get the glued map at `depth` with the blocks and families of family n."""
    blocks = glued_family_blocks(n)
    families = _block_table(_identity_table(depth), blocks, depth)
    return BlockPermutation(
        build_glued_blocks(depth),
        tuple(blocks),
        tuple(IntervalCollection(f) for f in families),
    )


def build_level_permutation(depth: int, seed: int = 0) -> RearrangementMap:
    """Get a random measure preserving bijection permuting every level independently.

    Args:
        depth: truncation depth N.
        seed: seed of `numpy.random.default_rng`.

    Returns:
        The map on D_0^N.
    """
    if depth < 0:
        raise ValueError(f"invalid-depth: depth must be >= 0, found {depth}")
    rng = np.random.default_rng(seed)
    table = {}
    for k in range(depth + 1):
        perm = rng.permutation(2**k)
        for i in range(2**k):
            table[DyadicInterval(k, i)] = DyadicInterval(k, int(perm[i]))
    return RearrangementMap(depth, depth, table)
