"""Principal demi-eigenvalues of the Pucci extremal operators with the
Robin condition ``du/dn = alpha u``, computed by a monotone wide-stencil
scheme, Howard policy iteration and nonlinear inverse power iteration."""
from .operator_core import (
    PucciPair,
    SymMat2,
    eigs_sym2,
    pucci_minus,
    pucci_minus_from_eigs,
    pucci_plus,
    pucci_plus_from_eigs,
    pucci_sup_sample_oracle,
)
from .mesh import Domain, Grid, ScalarField, build_grid, restrict_sup, sup_norm
from .discretization import StencilSet, assemble_residual, bellman_value, directional_second_diff, robin_row
from .solver import (
    ConvergenceError,
    EigenResult,
    ShiftedProblem,
    ShiftTooSmallError,
    SolverConfig,
    adapt_shift,
    collatz_bracket,
    howard_solve,
    principal_eigen,
)
from .oracles import (
    explicit_subsolution_exp,
    halfspace_profile,
    oracle_interval,
    oracle_rectangle_linear,
    transcendental_root,
)
from .experiments import (
    blowup_profile,
    comparison_sanity,
    concentration_profile,
    convergence_study,
    liouville_check,
    sweep_alpha,
)

__version__ = "0.1.0"

__all__ = [
    "PucciPair",
    "SymMat2",
    "eigs_sym2",
    "pucci_minus",
    "pucci_minus_from_eigs",
    "pucci_plus",
    "pucci_plus_from_eigs",
    "pucci_sup_sample_oracle",
    "Domain",
    "Grid",
    "ScalarField",
    "build_grid",
    "restrict_sup",
    "sup_norm",
    "StencilSet",
    "assemble_residual",
    "bellman_value",
    "directional_second_diff",
    "robin_row",
    "ConvergenceError",
    "EigenResult",
    "ShiftedProblem",
    "ShiftTooSmallError",
    "SolverConfig",
    "adapt_shift",
    "collatz_bracket",
    "howard_solve",
    "principal_eigen",
    "explicit_subsolution_exp",
    "halfspace_profile",
    "oracle_interval",
    "oracle_rectangle_linear",
    "transcendental_root",
    "blowup_profile",
    "comparison_sanity",
    "concentration_profile",
    "convergence_study",
    "liouville_check",
    "sweep_alpha",
]
