"""Rearrangements of dyadic intervals: builders, Semenov ratios and Carleson distortion."""

from dyrex.rearrangement.builders import (
    BlockPermutation,
    build_identity,
    build_parity_shift,
    build_block_perm,
    build_glued_blocks,
    build_level_permutation,
    glued_family_blocks,
    glued_families,
    glued_depth,
)
from dyrex.rearrangement.semenov import (
    semenov_ratio,
    semenov_exact,
    semenov_heuristic,
    shadow_semenov,
)
from dyrex.rearrangement.distortion import (
    DistortionResult,
    carleson_image,
    carleson_distortion,
)
