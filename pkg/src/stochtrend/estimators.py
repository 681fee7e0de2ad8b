"""Penalized-difference trend estimators and Gaussian prediction bands.

The ordinary least squares fit solves (I + nu U) mu = Y with U the banded
penalty matrix; the weighted variant replaces I by the banded inverse
error covariance, and the missing-data variant replaces I by a 0/1
diagonal.  All linear systems stay banded, so fits cost O(n) at fixed
order.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtri

from .ar import rinv_band
from .banded import (
    add_diag,
    band_add_scaled,
    band_cholesky,
    band_solve,
    identity_plus_scaled,
    inverse_diagonal,
)
from .errors import NotPositiveDefiniteError, UnidentifiableTrendError
from .operators import (
    check_order,
    full_difference_gram,
    penalty_matrix,
    vandermonde_nullspace,
)


@dataclass(frozen=True)
class PenaltySpec:
    """One estimator: difference order d and nonnegative penalty weight nu."""

    d: int
    nu: float

    def __post_init__(self):
        object.__setattr__(self, "d", check_order(self.d))
        if not (self.nu >= 0):
            raise ValueError(f"penalty weight must be >= 0, got {self.nu}")
        object.__setattr__(self, "nu", float(self.nu))


@dataclass(frozen=True)
class TimeSeries:
    """Ordered observations with an optional missing-value mask."""

    values: np.ndarray
    observed: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        obs = np.asarray(self.observed, dtype=bool)
        if v.ndim != 1 or obs.shape != v.shape:
            raise ValueError("values and observed mask must be 1-d and equal length")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "observed", obs)

    @classmethod
    def from_values(cls, values):
        """Build a series; non-finite entries are treated as missing."""
        v = np.asarray(values, dtype=float)
        return cls(values=v, observed=np.isfinite(v))

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def fully_observed(self):
        return bool(self.observed.all())


@dataclass(frozen=True)
class TrendFit:
    """Fitted trend with optional prediction bands and diagnostics."""

    mu_hat: np.ndarray
    spec: PenaltySpec
    sse: float
    lower: np.ndarray = None
    upper: np.ndarray = None
    criterion: float = None
    dof: float = None


def _require_complete(Y, what):
    if not Y.fully_observed:
        raise ValueError(f"{what} requires a fully observed series; use fit_missing")


def _check_length(Y, spec):
    if Y.n < 2 * spec.d + 1:
        raise ValueError(f"series too short: n={Y.n}, need n >= {2 * spec.d + 1} for d={spec.d}")


def fit_ols(Y, spec):
    """Penalized least squares trend fit for a fully observed series.

    Solves (I + nu * Sbar'Sbar) mu = Y via banded Cholesky and records
    SSE = ||Y - mu||^2.
    """
    _require_complete(Y, "fit_ols")
    _check_length(Y, spec)
    if spec.nu == 0.0:
        mu = Y.values.copy()
        return TrendFit(mu_hat=mu, spec=spec, sse=0.0)
    U = penalty_matrix(spec.d, Y.n)
    F = band_cholesky(identity_plus_scaled(U, spec.nu))
    mu = band_solve(F, Y.values)
    return TrendFit(mu_hat=mu, spec=spec, sse=float(np.sum((Y.values - mu) ** 2)))


def fit_missing(Y, spec):
    """Trend fit with sporadically missing observations.

    Masked entries contribute zero to the data term, so the system is
    (Itilde + nu U) mu = Itilde Y with Itilde the 0/1 observation
    indicator; the trend is estimated at every position, including the
    missing ones.
    """
    _check_length(Y, spec)
    if Y.fully_observed:
        return fit_ols(Y, spec)
    if spec.nu == 0.0:
        raise UnidentifiableTrendError(
            "nu = 0 with missing data leaves the trend free at unobserved positions"
        )
    _check_identifiable(Y, spec.d)
    U = penalty_matrix(spec.d, Y.n)
    system = add_diag(identity_plus_scaled(U, spec.nu), np.where(Y.observed, 0.0, -1.0))
    rhs = np.where(Y.observed, Y.values, 0.0)
    try:
        F = band_cholesky(system)
    except NotPositiveDefiniteError as exc:
        raise UnidentifiableTrendError(
            f"observation pattern cannot pin down the order-{spec.d} trend: {exc}"
        ) from exc
    mu = band_solve(F, rhs)
    resid = np.where(Y.observed, Y.values - mu, 0.0)
    return TrendFit(mu_hat=mu, spec=spec, sse=float(np.sum(resid**2)))


def _check_identifiable(Y, d):
    # The null space of U is the degree-(d-1) polynomials; the observed
    # rows of the Vandermonde basis must have full column rank.
    P = vandermonde_nullspace(d, Y.n)
    P_obs = P[Y.observed]
    if P_obs.shape[0] < d:
        raise UnidentifiableTrendError(
            f"only {P_obs.shape[0]} observed points; an order-{d} trend needs at least {d}"
        )
    svals = np.linalg.svd(P_obs, compute_uv=False)
    if svals[-1] <= 1e-12 * max(svals[0], 1.0):
        _, _, vt = np.linalg.svd(P_obs)
        coef = vt[-1]
        terms = " + ".join(f"{c:.3g}*(t/n)^{j}" for j, c in enumerate(coef))
        raise UnidentifiableTrendError(
            f"observed points leave the polynomial direction {terms} unidentified"
        )


def fit_wls(Y, spec, err):
    """Weighted trend fit (Rinv + nu U) mu = Rinv Y for an AR error model.

    Rinv is assembled directly from the AR coefficients as a banded
    matrix (the Cholesky factor of Rinv is the AR whitening filter with
    its exact stationary initial block), keeping the system banded with
    bandwidth max(p, d).
    """
    _require_complete(Y, "fit_wls")
    _check_length(Y, spec)
    if spec.nu == 0.0:
        mu = Y.values.copy()
        return TrendFit(mu_hat=mu, spec=spec, sse=0.0)
    Rinv = rinv_band(err, Y.n)
    U = penalty_matrix(spec.d, Y.n)
    F = band_cholesky(band_add_scaled(Rinv, U, spec.nu))
    mu = band_solve(F, Rinv.matvec(Y.values))
    return TrendFit(mu_hat=mu, spec=spec, sse=float(np.sum((Y.values - mu) ** 2)))


def normal_quantile(prob):
    """Standard normal quantile (inverse CDF)."""
    if not 0.0 < prob < 1.0:
        raise ValueError(f"probability must be in (0, 1), got {prob}")
    return float(ndtri(prob))


def prediction_band(fit, sigma_eps2, nu_star, alpha=0.05):
    """Attach pointwise (1-alpha) prediction bands to a fitted trend.

    The conditional variance matrix is D = sigma_eps2 * (I + nu_star *
    (Z Z')^{-1})^{-1} with Z the summation operator, so (Z Z')^{-1} is
    the banded full-difference Gram matrix.  Half-widths use the square
    root of the diagonal: D is a variance-covariance matrix, so its
    diagonal carries squared units and the band is mu_t +/- z * sqrt(D_tt).
    """
    if nu_star <= 0:
        raise ValueError(f"nu_star must be > 0, got {nu_star}")
    if sigma_eps2 < 0:
        raise ValueError("sigma_eps2 must be >= 0")
    n = fit.mu_hat.shape[0]
    G = full_difference_gram(fit.spec.d, n)
    F = band_cholesky(identity_plus_scaled(G, nu_star))
    d_tt = sigma_eps2 * inverse_diagonal(F)
    half = normal_quantile(1.0 - alpha / 2.0) * np.sqrt(np.clip(d_tt, 0.0, None))
    return replace(fit, lower=fit.mu_hat - half, upper=fit.mu_hat + half)


def effective_dof(spec, n):
    """Effective degrees of freedom tr((I + nu U)^{-1}); n at nu=0, -> d as nu grows."""
    if spec.nu == 0.0:
        return float(n)
    U = penalty_matrix(spec.d, n)
    F = band_cholesky(identity_plus_scaled(U, spec.nu))
    return float(np.sum(inverse_diagonal(F)))
