"""Stochastic trend estimation by penalized d-th order differencing.

The estimator solves (I + nu * Sbar'Sbar) mu = Y for a banded penalty
matrix built from the order-d difference operator; the penalty weight and
order are chosen from data by a spectral trace criterion, and the
asymptotic mean-square-error theory behind the estimator can be validated
numerically against exact finite-n traces and dense matrix oracles.
"""

from .ar import ARModel
from .asymptotics import (
    AsymptoticConstants,
    beta_fn,
    constants,
    exact_bias,
    exact_variance,
    mse_rate_exponent,
    optimal_nu,
    predicted_bias,
    predicted_variance,
)
from .errors import (
    ConvergenceError,
    DegenerateInputError,
    NonStationaryError,
    NotPositiveDefiniteError,
    SymmetryError,
    UnidentifiableTrendError,
)
from .estimators import (
    PenaltySpec,
    TimeSeries,
    TrendFit,
    effective_dof,
    fit_missing,
    fit_ols,
    fit_wls,
    prediction_band,
)
from .operators import (
    BandedSymMatrix,
    apply_difference,
    apply_summation,
    penalty_matrix,
    signed_binomial_weights,
    vandermonde_nullspace,
)
from .selection import (
    SelectionResult,
    SpectralDensity,
    criterion_phi,
    criterion_phi_asymptotic,
    fit_ar_with_order,
    local_linear_preliminary,
    noise_variance_first_diff,
    select,
    spectral_density_at,
)
from .simulation import (
    ExperimentResult,
    Table1Config,
    TrendGenSpec,
    calibrate_snr,
    generate_errors,
    generate_trend,
    performance_ratio,
    run_rate_experiment,
    run_table1,
)

__version__ = "0.1.0"

__all__ = [
    "ARModel",
    "AsymptoticConstants",
    "BandedSymMatrix",
    "ConvergenceError",
    "DegenerateInputError",
    "ExperimentResult",
    "NonStationaryError",
    "NotPositiveDefiniteError",
    "PenaltySpec",
    "SelectionResult",
    "SpectralDensity",
    "SymmetryError",
    "Table1Config",
    "TimeSeries",
    "TrendFit",
    "TrendGenSpec",
    "UnidentifiableTrendError",
    "apply_difference",
    "apply_summation",
    "beta_fn",
    "calibrate_snr",
    "constants",
    "criterion_phi",
    "criterion_phi_asymptotic",
    "effective_dof",
    "exact_bias",
    "exact_variance",
    "fit_ar_with_order",
    "fit_missing",
    "fit_ols",
    "fit_wls",
    "generate_errors",
    "generate_trend",
    "local_linear_preliminary",
    "mse_rate_exponent",
    "noise_variance_first_diff",
    "optimal_nu",
    "penalty_matrix",
    "performance_ratio",
    "predicted_bias",
    "predicted_variance",
    "prediction_band",
    "run_rate_experiment",
    "run_table1",
    "select",
    "signed_binomial_weights",
    "spectral_density_at",
    "vandermonde_nullspace",
]
