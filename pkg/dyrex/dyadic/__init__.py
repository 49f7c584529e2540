"""Exact arithmetic and combinatorics of dyadic intervals."""

from dyrex.dyadic.combinatorics import (
    measure,
    shadow,
    union_measure,
    carleson_constant,
    carleson_constant_naive,
    maximal_members,
    packing_sums,
    cell_mask,
    tree_packing_max,
)
