"""Banded symmetric positive-definite factorization, solves and traces.

The factorization/solve kernels are LAPACK's banded Cholesky routines via
scipy; everything above them (assembly, inverse diagonals, exact trace
formulas) is deterministic and validated against dense oracles in the
test suite.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .errors import NotPositiveDefiniteError
from .operators import BandedSymMatrix

_BLOCK = 1024


@dataclass(frozen=True)
class BandedCholesky:
    """Lower-banded Cholesky factor L with L L' = A, stored by diagonals."""

    n: int
    bandwidth: int
    factor: np.ndarray  # shape (bandwidth+1, n), scipy lower-banded layout

    @property
    def scipy_form(self):
        return (self.factor, True)


def band_cholesky(A):
    """Factor a symmetric positive-definite banded matrix.

    Raises
    ------
    NotPositiveDefiniteError
        If a pivot is non-positive; this signals a negative penalty
        weight or an inconsistent missing-data mask.
    """
    if not isinstance(A, BandedSymMatrix):
        raise TypeError("band_cholesky expects a BandedSymMatrix")
    try:
        fac = cholesky_banded(A.diagonals, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"matrix is not positive definite: {exc}") from exc
    return BandedCholesky(n=A.n, bandwidth=A.bandwidth, factor=fac)


def band_solve(F, rhs):
    """Solve A x = rhs with a factored banded matrix; rhs may hold columns."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != F.n:
        raise ValueError(f"rhs has leading dimension {rhs.shape[0]}, expected {F.n}")
    return cho_solve_banded(F.scipy_form, rhs)


def _identity_block(n, start, stop):
    E = np.zeros((n, stop - start))
    E[np.arange(start, stop), np.arange(stop - start)] = 1.0
    return E


def inverse_diagonal(F):
    """Diagonal of A^{-1}, by solving against identity columns in blocks."""
    out = np.empty(F.n)
    for start in range(0, F.n, _BLOCK):
        stop = min(start + _BLOCK, F.n)
        X = band_solve(F, _identity_block(F.n, start, stop))
        out[start:stop] = X[np.arange(start, stop), np.arange(stop - start)]
    return out


def _as_band(M, n):
    if isinstance(M, BandedSymMatrix):
        if M.n != n:
            raise ValueError(f"dimension mismatch: matrix is {M.n}, factor is {n}")
        return M
    if np.isscalar(M):
        return toeplitz_band_from_autocov(np.array([float(M)]), n)
    return toeplitz_band_from_autocov(np.asarray(M, dtype=float), n)


def toeplitz_band_from_autocov(acov, n, cutoff=1e-14):
    """Banded symmetric Toeplitz matrix from an autocovariance sequence.

    Lags with |acov| below ``cutoff`` are dropped from the tail; for the
    geometrically decaying covariances of stationary AR models this keeps
    the truncation error far below every test tolerance.
    """
    acov = np.asarray(acov, dtype=float)
    keep = len(acov)
    while keep > 1 and abs(acov[keep - 1]) < cutoff:
        keep -= 1
    keep = min(keep, n)
    diags = np.zeros((keep, n))
    for k in range(keep):
        diags[k, : n - k] = acov[k]
    return BandedSymMatrix(n=n, bandwidth=keep - 1, diagonals=diags)


def trace_quadratic(F, M):
    """Exact trace of A^{-1} M A^{-1} for a factored A and symmetric banded M.

    ``M`` may be a BandedSymMatrix, an autocovariance sequence (read as a
    truncated symmetric Toeplitz matrix) or a scalar multiple of the
    identity.  Computed deterministically from n banded solves.
    """
    Mb = _as_band(M, F.n)
    acc = 0.0
    for start in range(0, F.n, _BLOCK):
        stop = min(start + _BLOCK, F.n)
        X = band_solve(F, _identity_block(F.n, start, stop))
        acc += float(np.sum(X * Mb.matvec(X)))
    return acc


def trace_inv_product(F, M):
    """Exact trace of A^{-1} M for a factored A and symmetric banded M."""
    Mb = _as_band(M, F.n)
    acc = 0.0
    for start in range(0, F.n, _BLOCK):
        stop = min(start + _BLOCK, F.n)
        E = _identity_block(F.n, start, stop)
        X = band_solve(F, E)
        acc += float(np.sum(X * Mb.matvec(E)))
    return acc


def identity_plus_scaled(B, nu):
    """Banded matrix I + nu * B."""
    diags = nu * B.diagonals
    diags[0] += 1.0
    return BandedSymMatrix(n=B.n, bandwidth=B.bandwidth, diagonals=diags)


def band_add_scaled(A, B, alpha=1.0):
    """Banded matrix A + alpha * B (bandwidths may differ)."""
    if A.n != B.n:
        raise ValueError("dimension mismatch")
    b = max(A.bandwidth, B.bandwidth)
    diags = np.zeros((b + 1, A.n))
    diags[: A.bandwidth + 1] = A.diagonals
    diags[: B.bandwidth + 1] += alpha * B.diagonals
    return BandedSymMatrix(n=A.n, bandwidth=b, diagonals=diags)


def add_diag(B, vec):
    """Banded matrix B + diag(vec)."""
    vec = np.asarray(vec, dtype=float)
    if vec.shape[0] != B.n:
        raise ValueError("diagonal length mismatch")
    diags = B.diagonals.copy()
    diags[0] += vec
    return BandedSymMatrix(n=B.n, bandwidth=B.bandwidth, diagonals=diags)
