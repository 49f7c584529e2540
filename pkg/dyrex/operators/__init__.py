"""Linear Haar operators, norm searches and UMD / type constant estimators."""

from dyrex.operators.haar_operator import (
    LinearHaarOperator,
    gamma_weights,
    rearrangement_operator,
    martingale_transform_operator,
    identity_operator,
    a_p_operator,
    apply_rearrangement,
    apply_martingale_transform,
)
from dyrex.operators.norm_search import (
    restart_generator,
    random_starts,
    projected_ascent,
    maximize_ratio,
    rayleigh_ratio,
    operator_norm_search,
    operator_norm_exact_small,
    power_iteration,
    check_gradient,
)
from dyrex.operators.constants import (
    rademacher_signs,
    rademacher_average,
    type_constant,
    type_witness_ratio,
    umd_constant,
    alternating_sign_test,
    alternating_signs,
    lower_half_support,
    check_alternating_envelope,
    check_umd_envelope,
    block_witness,
    glued_type_witness,
)
