"""Autoregressive error models: covariances, spectra, whitening, fitting.

The spectral density convention is the lag-sum one, g(u) = sum_j rho(j)
exp(iju), so g(0) equals the sum of all autocovariances and a white-noise
model has g(u) = sigma2 everywhere.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonStationaryError
from .operators import BandedSymMatrix


@dataclass(frozen=True)
class ARModel:
    """AR(p) model: eps_t = phi_1 eps_{t-1} + ... + phi_p eps_{t-p} + delta_t.

    ``sigma2`` is the innovation variance Var(delta_t).  Construction
    rejects non-causal coefficient vectors (roots of 1 - sum phi_k z^k
    must lie strictly outside the unit circle).
    """

    phi: tuple = ()
    sigma2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "phi", tuple(float(c) for c in self.phi))
        if self.sigma2 < 0:
            raise ValueError(f"innovation variance must be >= 0, got {self.sigma2}")
        if self.p and not _is_causal(self.phi):
            raise NonStationaryError(
                f"AR coefficients {self.phi} have a root on or inside the unit circle"
            )

    @property
    def p(self):
        return len(self.phi)

    def spectral_density(self, u):
        """g(u) = sigma2 / |1 - sum_k phi_k exp(iku)|^2."""
        u = np.asarray(u, dtype=float)
        transfer = np.ones(u.shape, dtype=complex)
        for k, c in enumerate(self.phi, start=1):
            transfer -= c * np.exp(1j * k * u)
        out = self.sigma2 / np.abs(transfer) ** 2
        return out if out.ndim else float(out)

    def autocovariances(self, nlags):
        """gamma(0..nlags) of the stationary process."""
        if self.p == 0:
            out = np.zeros(nlags + 1)
            out[0] = self.sigma2
            return out
        p = self.p
        phi = np.asarray(self.phi)
        # Yule-Walker block: gamma(k) - sum_j phi_j gamma(|k-j|) = sigma2 * 1{k=0}
        A = np.eye(p + 1)
        for k in range(p + 1):
            for j in range(1, p + 1):
                A[k, abs(k - j)] -= phi[j - 1]
        rhs = np.zeros(p + 1)
        rhs[0] = self.sigma2
        head = np.linalg.solve(A, rhs)
        out = np.empty(nlags + 1)
        out[: min(p, nlags) + 1] = head[: min(p, nlags) + 1]
        for k in range(p + 1, nlags + 1):
            out[k] = float(phi @ out[k - p : k][::-1])
        return out

    def autocovariance_sequence(self, cutoff=1e-14, max_lag=100000):
        """gamma(0), gamma(1), ... truncated once |gamma| stays below cutoff."""
        if self.p == 0:
            return np.array([self.sigma2])
        block = 64
        nlags = block
        while nlags <= max_lag:
            g = self.autocovariances(nlags)
            tail = np.abs(g[-block // 2 :])
            if tail.max() < cutoff:
                keep = len(g)
                while keep > 1 and abs(g[keep - 1]) < cutoff:
                    keep -= 1
                return g[:keep]
            nlags *= 2
        return self.autocovariances(max_lag)


def _is_causal(phi):
    poly = np.concatenate([[-c for c in reversed(phi)], [1.0]])
    roots = np.roots(poly)
    return roots.size == 0 or float(np.min(np.abs(roots))) > 1.0


def whitening_band(model, n):
    """Lower-banded whitening filter W with Cov(W eps) = sigma2 * I.

    Rows p+1..n apply the AR recursion; the first p rows are the exact
    stationary initial block, sigma * chol(R_p)^{-1}.  Returned in the
    same by-diagonal layout as BandedSymMatrix (band[k, j] = W[j+k, j]).
    """
    p = model.p
    if model.sigma2 <= 0:
        raise ValueError("whitening requires a positive innovation variance")
    band = np.zeros((p + 1, n))
    band[0, :] = 1.0
    for k, c in enumerate(model.phi, start=1):
        band[k, : n - k] = -c
    if p:
        if n < p:
            raise ValueError(f"series too short for AR({p}) whitening: n={n}")
        gam = model.autocovariances(p - 1)
        Rp = gam[np.abs(np.subtract.outer(np.arange(p), np.arange(p)))]
        Lp = np.linalg.cholesky(Rp)
        Ap = math.sqrt(model.sigma2) * np.linalg.inv(Lp)
        for j in range(p):
            for k in range(p - j):
                band[k, j] = Ap[j + k, j]
    return band


def rinv_band(model, n):
    """Banded inverse covariance R^{-1} = W'W / sigma2 of n consecutive values."""
    p = model.p
    band = whitening_band(model, n)
    diags = np.zeros((p + 1, n))
    for m in range(p + 1):
        for k in range(m, p + 1):
            # (W'W)[j, j+m] accumulates band[k, j] * band[k-m, j+m]
            diags[m, : n - m] += band[k, : n - m] * band[k - m, m:n]
    return BandedSymMatrix(n=n, bandwidth=p, diagonals=diags / model.sigma2)


def sample_autocovariances(x, nlags, demean=True):
    """Biased sample autocovariances c(0..nlags) with divisor n."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if demean:
        x = x - x.mean()
    out = np.empty(min(nlags, n - 1) + 1)
    for k in range(len(out)):
        out[k] = float(x[: n - k] @ x[k:]) / n
    return out


def levinson(c, p_max):
    """Levinson-Durbin recursion on autocovariances c(0..p_max).

    Returns a list of (phi, sigma2) pairs for orders 0..p_max; the biased
    sample autocovariances guarantee every returned model is stationary.
    """
    c = np.asarray(c, dtype=float)
    if c[0] <= 0:
        raise ValueError("autocovariance at lag 0 must be positive")
    fits = [((), float(c[0]))]
    phi = np.zeros(0)
    sigma2 = float(c[0])
    for k in range(1, p_max + 1):
        acc = c[k] - float(phi @ c[k - 1 : 0 : -1]) if k > 1 else c[1]
        kappa = acc / sigma2
        new = np.empty(k)
        new[: k - 1] = phi - kappa * phi[::-1]
        new[k - 1] = kappa
        phi = new
        sigma2 *= 1.0 - kappa * kappa
        if sigma2 <= 0.0:
            break
        fits.append((tuple(phi), float(sigma2)))
    return fits
