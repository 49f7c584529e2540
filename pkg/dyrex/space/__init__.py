"""Vector valued step functions, Haar analysis and Hardy space functionals."""

from dyrex.space.transform import (
    n_intervals,
    n_cells,
    level_slice,
    synthesize,
    analyze,
    project,
    refine,
    grid_norm_p,
)
from dyrex.space.haar import (
    haar_function,
    lp_norm,
    lp_norm_values,
    martingale_projection,
    maximal_function_values,
    hp_norm,
    hp_norm_values,
    h1_norm,
    h1_norm_coeffs,
)
from dyrex.space.atoms import (
    validate_atom,
    h1at_upper_bound,
    simple_atom,
    build_atom,
    expectation_norm,
    atomic_combination,
)
