"""Closed-form asymptotic mean-square-error constants and their exact
finite-n trace counterparts.

The leading-order variance of the penalized fit is c1 * nu^(-1/(2d)) and
the squared bias is c2 * (nu^(1/(2d))/n)^(2d-1); the exact finite-n values
are deterministic traces of banded-inverse products, so agreement can be
checked to any tolerance without Monte Carlo noise.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .ar import ARModel, rinv_band
from .banded import (
    band_add_scaled,
    band_cholesky,
    band_solve,
    identity_plus_scaled,
    trace_quadratic,
)
from .operators import BandedSymMatrix, check_order, penalty_matrix, signed_binomial_weights


def beta_fn(a, b):
    """Euler Beta function via log-Gamma."""
    if a <= 0 or b <= 0:
        raise ValueError(f"Beta arguments must be positive, got ({a}, {b})")
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def c6_constant(d):
    """c6(d) = (1/pi) * integral_0^inf du / (1 + u^(2d))."""
    d = check_order(d)
    return beta_fn(1.0 / (2 * d), 1.0 - 1.0 / (2 * d)) / (2 * d * math.pi)


@dataclass(frozen=True)
class AsymptoticConstants:
    """Rate constants for one (d, g0, tau2) configuration.

    c1 scales the variance, c2 the squared bias, c3 the minimized
    mean-square error, c6 the selection-criterion penalty.
    """

    d: int
    g0: float
    tau2: float
    c1: float
    c2: float
    c3: float
    c6: float

    def bandwidth(self, nu, n):
        """Effective kernel bandwidth b = nu^(1/(2d)) / n."""
        return nu ** (1.0 / (2 * self.d)) / n


def constants(d, g0, tau2):
    """Asymptotic constants for error spectral level g0 and trend scale tau2."""
    d = check_order(d)
    if g0 <= 0 or tau2 <= 0:
        raise ValueError("g0 and tau2 must be positive")
    two_d = 2 * d
    c1 = g0 * beta_fn(1.0 / two_d, 2.0 - 1.0 / two_d) / (two_d * math.pi)
    c2 = tau2 * beta_fn(1.0 + 1.0 / two_d, 1.0 - 1.0 / two_d) / (two_d * math.pi)
    c3 = c1 * (c2 / c1) ** (1.0 / two_d) * two_d * (two_d - 1.0) ** (-1.0 + 1.0 / two_d)
    return AsymptoticConstants(d=d, g0=g0, tau2=tau2, c1=c1, c2=c2, c3=c3, c6=c6_constant(d))


def optimal_nu(n, consts):
    """Penalty weight nu* = n^(2d-1) (c1/c2) / (2d-1) minimizing the MSE."""
    d = consts.d
    return float(n) ** (2 * d - 1) * (consts.c1 / consts.c2) / (2 * d - 1)


def predicted_variance(nu, consts):
    """Leading-order variance c1 * nu^(-1/(2d))."""
    if nu <= 0:
        raise ValueError("nu must be > 0")
    return consts.c1 * nu ** (-1.0 / (2 * consts.d))


def predicted_bias(nu, n, consts, g_gamma0=1.0):
    """Leading-order squared bias c2 * g_gamma0 * (nu^(1/(2d))/n)^(2d-1).

    ``g_gamma0`` is the spectral density at zero of the standardized
    difference process; 1 for i.i.d. differences.
    """
    if nu <= 0:
        raise ValueError("nu must be > 0")
    d = consts.d
    return consts.c2 * g_gamma0 * (nu ** (1.0 / (2 * d)) / n) ** (2 * d - 1)


def t3_bias_constant(d, d0, tau2):
    """Bias constant when fitting order d >= d0 against a true order d0."""
    two_d = 2 * d
    arg = (2 * d0 - 1.0) / two_d
    return tau2 * beta_fn(arg, 2.0 - arg) / (two_d * math.pi)


@dataclass(frozen=True)
class BiasPrediction:
    """Predicted squared bias; ``sharp`` is False for order-only bounds."""

    value: float
    sharp: bool


def predicted_bias_misspecified(nu, d, n, d0, tau2):
    """Squared-bias prediction when the fitted order d differs from the truth d0.

    For d >= d0 the prediction is sharp with constant c4; for d < d0 only
    the bound scale (nu/n)^(2d) is returned, flagged as order-only.
    """
    d = check_order(d)
    d0 = check_order(d0)
    if d >= d0:
        c4 = t3_bias_constant(d, d0, tau2)
        return BiasPrediction(value=c4 * (nu ** (1.0 / (2 * d)) / n) ** (2 * d0 - 1), sharp=True)
    return BiasPrediction(value=(nu / n) ** (2 * d), sharp=False)


def composite_rate_constant(d, d0, g0, tau2):
    """Constant in MSE ~ c(d) n^(-(2d0-1)/(2d0)) at the nu minimizing the sum
    of the order-d variance and the order-(d, d0) bias; minimized at d = d0."""
    if d < d0:
        raise ValueError("composite constant is defined for d >= d0")
    c1 = constants(d, g0, tau2).c1
    c4 = t3_bias_constant(d, d0, tau2)
    two_d0 = 2 * d0
    return (
        two_d0
        * (two_d0 - 1.0) ** (-1.0 + 1.0 / two_d0)
        * c1 ** (1.0 - 1.0 / two_d0)
        * c4 ** (1.0 / two_d0)
    )


def _error_autocov(err):
    if isinstance(err, ARModel):
        return err.autocovariance_sequence()
    return np.array([float(err)])


def _penalized_factor(nu, d, n):
    U = penalty_matrix(d, n)
    return U, band_cholesky(identity_plus_scaled(U, nu))


def exact_variance(nu, d, n, err=1.0):
    """Exact variance tr((I + nu U)^{-2} T_n(g)) / n.

    ``err`` is an ARModel or a white-noise variance.
    """
    _, F = _penalized_factor(nu, d, n)
    return trace_quadratic(F, _error_autocov(err)) / n


def exact_bias(nu, d, n, sigma_gamma2):
    """Exact squared bias nu^2 sigma_gamma2 tr((I + nu U)^{-2} U) / n."""
    U, F = _penalized_factor(nu, d, n)
    return nu * nu * sigma_gamma2 * trace_quadratic(F, U) / n


def _sbar_sparse(d, n):
    rows, cols, vals = [], [], []
    for l in range(d + 1):
        coef = (-1.0) ** l * math.comb(d, l)
        for r in range(n - d):
            rows.append(r)
            cols.append(r + d - l)
            vals.append(coef)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n - d, n))


def exact_bias_stationary(nu, d, n, sigma_gamma2, rho):
    """Exact squared bias when the order-d differences are stationary with
    autocorrelations rho(0..L) instead of i.i.d.

    Evaluates nu^2 sigma_gamma2 tr((I+nuU)^{-1} Sbar' T(rho) Sbar (I+nuU)^{-1}) / n.
    """
    rho = np.asarray(rho, dtype=float)
    U, F = _penalized_factor(nu, d, n)
    S = _sbar_sparse(d, n)
    m = n - d
    offsets = [k for k in range(-len(rho) + 1, len(rho)) if abs(k) < m]
    R = sp.diags([np.full(m - abs(k), rho[abs(k)]) for k in offsets], offsets, format="csr")
    M = (S.T @ R @ S).tocoo()
    b = d + len(rho) - 1
    diags = np.zeros((b + 1, n))
    for i, j, v in zip(M.row, M.col, M.data):
        if i >= j:
            diags[i - j, j] = v
    Mb = BandedSymMatrix(n=n, bandwidth=b, diagonals=diags)
    return nu * nu * sigma_gamma2 * trace_quadratic(F, Mb) / n


def summation_dense(d, n):
    """Dense lower-triangular summation operator S_d."""
    w = signed_binomial_weights(d, n)
    S = np.zeros((n, n))
    for l in range(n):
        S[np.arange(l, n), np.arange(n - l)] = w[l]
    return S


def exact_bias_misspecified(nu, d, n, d0, sigma_gamma2):
    """Exact squared bias when fitting order d while the trend was generated
    at order d0 (pure stochastic part, no polynomial).

    Evaluates nu^2 sigma_gamma2 ||(I + nu U_d)^{-1} U_d S_{d0}||_F^2 / n.
    """
    U, F = _penalized_factor(nu, d, n)
    X = band_solve(F, U.matvec(summation_dense(d0, n)))
    return nu * nu * sigma_gamma2 * float(np.sum(X * X)) / n


def exact_wls_variance(nu, d, n, err):
    """Exact weighted variance tr(((Rinv + nu U)^{-1} Rinv)^2) / n."""
    Rinv = rinv_band(err, n)
    U = penalty_matrix(d, n)
    F = band_cholesky(band_add_scaled(Rinv, U, nu))
    B = band_solve(F, Rinv.matvec(np.eye(n)))
    return float(np.sum(B * B.T)) / n


def exact_wls_bias(nu, d, n, err, sigma_gamma2):
    """Exact weighted squared bias nu^2 sigma_gamma2 tr(A^{-1} Rinv A^{-1} U) / n
    with A = Rinv + nu U."""
    Rinv = rinv_band(err, n)
    U = penalty_matrix(d, n)
    F = band_cholesky(band_add_scaled(Rinv, U, nu))
    X = band_solve(F, np.eye(n))
    G = Rinv.matvec(X)
    H = U.matvec(X)
    return nu * nu * sigma_gamma2 * float(np.sum(G * H.T)) / n


def mse_rate_exponent(samples):
    """Least-squares slope of log(MSE) against log(n).

    ``samples`` is a sequence of (n, mse) pairs, at least three, with the
    n values geometrically spaced.
    """
    pts = [(float(n), float(m)) for n, m in samples]
    if len(pts) < 3:
        raise ValueError("need at least three (n, mse) samples")
    ns = np.array([p[0] for p in pts])
    ms = np.array([p[1] for p in pts])
    if np.any(ms < 0):
        raise ValueError("mse values must be nonnegative")
    if np.all(ms == ms[0]):
        return 0.0
    if np.any(ms <= 0):
        raise ValueError("mse values must be positive to fit a log-log slope")
    return float(np.polyfit(np.log(ns), np.log(ms), 1)[0])
