"""Exact arithmetic for sums of four scaled generalized polygonal numbers:
representation counting on shifted diagonal lattices, p-adic local densities,
main-term (Eisenstein-type) Fourier coefficients, and linear-sieve machinery
for almost-prime coordinate restrictions."""

__version__ = "0.1.0"

from .core import (
    ONES,
    CoefficientVector,
    LatticeCoset,
    PolygonalFamily,
    ProblemInstance,
    build_coset,
    eval_polygonal,
    level_of_form,
    make_instance,
    shifted_square_coordinate,
    target_h,
)
from .densities import (
    LocalDensity,
    density_at_2,
    density_at_divisor_prime,
    density_odd_explicit,
    density_oracle,
    local_density,
    tau_factor_checked,
)
from .eisenstein import (
    EisensteinCoefficient,
    assemble_eisenstein,
    beta_ratio,
    beta_value,
    check_beta_bounds,
    cusp_bound,
    decomposition_residual,
    g_correlation,
    gamma_p_case,
    gamma_quotient,
    l_value,
    l_value_chi4,
    lattice_character,
)
from .enumeration import (
    ConstraintSpec,
    RepresentationSet,
    WitnessSpec,
    count_range,
    count_representations,
    direct_sieve_count,
    direct_sieve_count_c,
    prime_factor_count,
    witness_coverage,
    witness_search,
)
from .errors import (
    BudgetExceededError,
    ConfigurationError,
    DispatchError,
    ObstructionError,
    PolyrepError,
)
from .sieve import (
    SieveConfig,
    SieveWeightTable,
    beta_weighted_sums,
    capital_lambda_minus,
    harmonic_H,
    main_term_W,
    quadruple_sandwich_check,
    rosser_lambda,
    theorem_driver,
    theta_gate,
    threshold_check,
    weight_sandwich_check,
    weighted_sieve_sum,
)
