"""Maximal inequality, τ-monotone operators, condition C and the extrapolation checks."""

from dyrex.extrapolation.maximal import (
    shift_matrix,
    level_values,
    p_shift,
    maximal_sides,
    check_maximal_inequality,
    maximal_inequality_suite,
)
from dyrex.extrapolation.monotone import (
    level_images,
    SquareFunctionOperator,
    RademacherAverageOperator,
    a_square,
    a_rademacher,
    random_adapted_multipliers,
    multiplier_coeffs,
    sup_shift,
    check_tau_monotone,
    sup_power_identity,
    normalized_image_identity,
)
from dyrex.extrapolation.sublinear import (
    sublinear_norm_search,
    extrapolation_factor,
    check_extrapolation_42,
)
from dyrex.extrapolation.condition_c import (
    semenov_decomposition,
    check_condition_C,
    check_condition_C_all,
)
from dyrex.extrapolation.hardy import (
    apply_A_p,
    h1_norm_search,
    h1_bound_factor,
    check_theorem_52,
)
