"""Constant-curvature conformal metrics on the Moyal plane."""

from .classical import (
    ClassicalFactorParams,
    RadialProfile,
    family_curvature,
    family_factor,
    family_gauss_bonnet,
    family_profile,
    family_volume,
    gauss_bonnet_quadrature,
    scalar_curvature_radial,
)
from .matrix_basis import (
    MatrixOperator,
    RadialOperator,
    basis_eval,
    frame_scalar_curvature,
    laplacian,
    partial,
    partial_bar,
    radial_power_coefficients,
    star_product,
    trace,
)
from .perturbative import (
    PerturbativeParams,
    SmoothRadialFunction,
    deformed_conformal_factor,
    epsilon_general,
    epsilon_regular,
)
from .recurrence import (
    RecurrenceProblem,
    RecurrenceSolution,
    exponent_estimate,
    find_fs_seed,
    first_step,
    fs_series,
    gauss_bonnet_estimate,
    solve,
    telescoping_check,
)

__version__ = "0.1.0"
