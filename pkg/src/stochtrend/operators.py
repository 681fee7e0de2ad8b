"""Summation/difference operators and the banded penalty matrix.

Builds the order-d summation operator S_d, the difference operator S_{-d},
and the penalty matrix U = Sbar' Sbar, where Sbar is S_{-d} with its first
d rows deleted.  U is banded with bandwidth d; its interior elements have
the closed form (-1)^(j-k) * C(2d, d-|j-k|) and only the leading and
trailing d x d corners deviate from that Toeplitz band.

Indexing convention: the documentation uses 1-based series positions
t = 1..n (matching the usual time-series notation); all arrays are 0-based
internally, so position t corresponds to index t-1.
"""

import math
from dataclasses import dataclass

import numpy as np


def check_order(d):
    """Validate a difference order, returning it as a plain int."""
    if not isinstance(d, (int, np.integer)) or isinstance(d, bool):
        raise ValueError(f"difference order must be an integer, got {d!r}")
    if d < 1:
        raise ValueError(f"difference order must be >= 1, got {d}")
    return int(d)


def signed_binomial_weights(d, length):
    """Weights w_l = (-1)^l * C(-d, l) = C(d+l-1, l) of the summation operator.

    Parameters
    ----------
    d : int
        Difference order, >= 1.
    length : int
        Number of weights w_0 .. w_{length-1} to return.

    Returns
    -------
    numpy.ndarray
        Strictly positive weights, computed by the multiplicative
        recurrence w_0 = 1, w_l = w_{l-1} * (d+l-1) / l, which avoids
        factorial overflow.
    """
    d = check_order(d)
    if length < 1:
        raise ValueError("length must be >= 1")
    w = np.empty(length)
    w[0] = 1.0
    for l in range(1, length):
        w[l] = w[l - 1] * (d + l - 1) / l
    return w


def apply_summation(d, x):
    """Apply the order-d summation operator: y_t = sum_{j<=t} w_{t-j} x_j."""
    d = check_order(d)
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if n == 0:
        return x.copy()
    w = signed_binomial_weights(d, n)
    return np.convolve(x, w)[:n]


def apply_difference(d, x):
    """Apply the order-d difference operator S_{-d}.

    y_t = sum_{l=0..min(d,t-1)} (-1)^l C(d,l) x_{t-l}; the first d outputs
    are partial (warm-up) differences, so that S_d S_{-d} = I exactly.
    """
    d = check_order(d)
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    y = np.zeros(n)
    for l in range(min(d, n - 1) + 1):
        coef = (-1.0) ** l * math.comb(d, l)
        y[l:] += coef * x[: n - l]
    return y


@dataclass(frozen=True)
class BandedSymMatrix:
    """Symmetric banded matrix stored by diagonals.

    ``diagonals`` has shape (bandwidth+1, n); row k holds the k-th
    subdiagonal, diagonals[k, j] = A[j+k, j] for j < n-k (trailing slots
    of each row are padding and kept at zero).  Entries beyond the
    bandwidth are exactly zero.
    """

    n: int
    bandwidth: int
    diagonals: np.ndarray

    def to_dense(self):
        A = np.zeros((self.n, self.n))
        for k in range(self.bandwidth + 1):
            vals = self.diagonals[k, : self.n - k]
            idx = np.arange(self.n - k)
            A[idx + k, idx] = vals
            A[idx, idx + k] = vals
        return A

    def matvec(self, x):
        """Product A @ x; x may be a vector or a matrix of columns."""
        x = np.asarray(x, dtype=float)
        shaped = x if x.ndim > 1 else x[:, None]
        y = self.diagonals[0][: self.n, None] * shaped
        for k in range(1, self.bandwidth + 1):
            vals = self.diagonals[k, : self.n - k, None]
            y[k:] += vals * shaped[:-k]
            y[:-k] += vals * shaped[k:]
        return y if x.ndim > 1 else y[:, 0]


def _gram_band(d, n, t_low_floor):
    # Band of S'S restricted to rows t >= t_low_floor (1-based); the
    # interior value for offset m is (-1)^m C(2d, d-m) by the Vandermonde
    # convolution identity, with partial sums at the affected corners.
    diags = np.zeros((d + 1, n))
    for m in range(d + 1):
        diags[m, : n - m] = (-1.0) ** m * math.comb(2 * d, d - m)

    def entry(j1, k1):
        lo = max(k1, t_low_floor)
        hi = min(j1 + d, n)
        acc = 0
        for t in range(lo, hi + 1):
            acc += math.comb(d, t - j1) * math.comb(d, t - k1)
        return (-1.0) ** (k1 - j1) * acc

    head = range(1, min(d, n) + 1) if t_low_floor > 1 else range(0)
    tail = range(max(n - d + 1, 1), n + 1)
    for j1 in list(head) + list(tail):
        for m in range(d + 1):
            k1 = j1 + m
            if k1 <= n:
                diags[m, j1 - 1] = entry(j1, k1)
    return diags


def penalty_matrix(d, n):
    """Banded penalty matrix U = Sbar' Sbar for order d and dimension n.

    Requires n >= 2d+1 so that the interior Toeplitz band exists.  U is
    positive semidefinite with null space spanned by the polynomials of
    degree < d.
    """
    d = check_order(d)
    if n < 2 * d + 1:
        raise ValueError(f"dimension n={n} too small for order d={d}; need n >= {2 * d + 1}")
    return BandedSymMatrix(n=n, bandwidth=d, diagonals=_gram_band(d, n, d + 1))


def full_difference_gram(d, n):
    """Banded matrix S_{-d}' S_{-d} (all n rows kept, no truncation).

    This is the inverse Gram (Z Z')^{-1} of the summation operator
    Z = S_d; it drives the prediction-band variances.
    """
    d = check_order(d)
    if n < d + 1:
        raise ValueError(f"dimension n={n} too small for order d={d}")
    return BandedSymMatrix(n=n, bandwidth=d, diagonals=_gram_band(d, n, 1))


def vandermonde_nullspace(d, n):
    """Polynomial columns p_j(t) = (t/n)^(j-1), j = 1..d, annihilated by Sbar."""
    d = check_order(d)
    if n < d:
        raise ValueError(f"need n >= d, got n={n}, d={d}")
    t = np.arange(1, n + 1) / n
    return np.column_stack([t ** j for j in range(d)])
