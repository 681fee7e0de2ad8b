"""Symbol-driven Toeplitz, Hankel and circulant constructors, plus a
dependency-free dense symmetric eigensolver used as the oracle for every
spectral claim in the package.

Everything here is built for correctness at small-to-moderate dimension
(n <= 1024), not for speed.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, SymmetryError


@dataclass(frozen=True)
class Symbol:
    """Trigonometric polynomial f(u) = sum_{|j|<=N} b_j exp(i j u).

    ``coeffs`` has length 2N+1 and stores b_{-N} .. b_N, so b_j lives at
    index j+N.  A real symmetric Toeplitz/circulant requires b_j = b_{-j}.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or c.shape[0] % 2 != 1:
            raise ValueError("coeffs must be a 1-d array of odd length (b_-N .. b_N)")
        object.__setattr__(self, "coeffs", c)

    @property
    def halfwidth(self):
        return (self.coeffs.shape[0] - 1) // 2

    @property
    def is_symmetric(self):
        return bool(np.array_equal(self.coeffs, self.coeffs[::-1]))

    def coeff(self, j):
        N = self.halfwidth
        return self.coeffs[j + N] if -N <= j <= N else 0.0

    def evaluate(self, u):
        """Complex values f(u); take .real for symmetric symbols."""
        u = np.asarray(u, dtype=float)
        N = self.halfwidth
        js = np.arange(-N, N + 1)
        return np.exp(1j * np.multiply.outer(u, js)) @ self.coeffs


def symbol_from_even(half_coeffs):
    """Symmetric symbol from (b_0, b_1, ..., b_N), reflecting b_{-j} = b_j."""
    half = np.asarray(half_coeffs, dtype=float)
    return Symbol(np.concatenate([half[:0:-1], half]))


def difference_symbol_power(d):
    """Symbol of (2 - 2 cos u)^d: coefficients (-1)^j C(2d, d-|j|), |j| <= d."""
    import math

    half = [(-1.0) ** j * math.comb(2 * d, d - j) for j in range(d + 1)]
    return symbol_from_even(half)


def toeplitz(symbol, n):
    """Dense Toeplitz matrix T_n with T[j, k] = b_{j-k}."""
    if n < 1:
        raise ValueError("n must be >= 1")
    N = symbol.halfwidth
    padded = np.zeros(2 * n - 1)
    lo = max(-N, -(n - 1))
    hi = min(N, n - 1)
    for j in range(lo, hi + 1):
        padded[n - 1 + j] = symbol.coeff(j)
    idx = np.subtract.outer(np.arange(n), np.arange(n)) + (n - 1)
    return padded[idx]


def hankel(coeffs, n):
    """Dense Hankel matrix H with H[j, k] = coeffs[j + k] for 1-based j, k.

    ``coeffs`` is indexed by t = j + k, so it must have length >= 2n + 1;
    slots 0 and 1 are never read.
    """
    b = np.asarray(coeffs, dtype=float)
    if b.shape[0] < 2 * n + 1:
        raise ValueError(f"need coefficients up to index 2n = {2 * n}")
    idx = np.add.outer(np.arange(n), np.arange(n)) + 2
    return b[idx]


def circulant(symbol, n):
    """Dense circulant C_n(f) = sum_{|j|<=N} b_j P0^j; requires 2N < n."""
    N = symbol.halfwidth
    if 2 * N >= n:
        raise ValueError(f"symbol too wide: need 2N < n, got N={N}, n={n}")
    wrapped = np.zeros(n)
    for j in range(-N, N + 1):
        wrapped[j % n] = symbol.coeff(j)
    idx = np.subtract.outer(np.arange(n), np.arange(n)) % n
    return wrapped[idx]


def fourier_vector(j, n):
    """Circulant eigenvector e_j with entries n^{-1/2} exp(-i 2 pi j t / n), t = 1..n."""
    t = np.arange(1, n + 1)
    return np.exp(-2j * np.pi * j * t / n) / np.sqrt(n)


def flip_matrix(n):
    """Orthogonal index-reversal matrix W_n: W_n x = (x_n, ..., x_1)'."""
    return np.fliplr(np.eye(n))


def cyclic_permutation(n):
    """Cyclic permutation P0 with entry (j, k) = 1 iff j - k = 1 (mod n)."""
    return np.roll(np.eye(n), 1, axis=0)


def dense_sym_eigen(A, max_sweeps=60):
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi sweeps.

    Parameters
    ----------
    A : array_like, shape (n, n)
        Symmetric matrix; asymmetry beyond 1e-10 (relative to the largest
        entry) is rejected.  Works on a private copy.
    max_sweeps : int
        Sweep budget before giving up.

    Returns
    -------
    (eigenvalues, eigenvectors)
        Eigenvalues ascending; eigenvector k in column k.  At convergence
        the off-diagonal Frobenius mass is below 1e-12 * ||A||_F.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    scale = max(1.0, float(np.abs(A).max()) if n else 1.0)
    if n and float(np.abs(A - A.T).max()) > 1e-10 * scale:
        raise SymmetryError("matrix is not symmetric within 1e-10")

    work = (A + A.T) / 2.0
    V = np.eye(n)
    norm_f = float(np.linalg.norm(work))
    tol = 1e-12 * norm_f

    for _ in range(max_sweeps):
        # off-diagonal mass measured directly; the total-minus-diagonal
        # shortcut cancels catastrophically near convergence
        off = float(np.linalg.norm(work - np.diag(np.diag(work))))
        if off <= tol:
            order = np.argsort(np.diag(work), kind="stable")
            return np.diag(work)[order].copy(), V[:, order].copy()
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                if apq == 0.0:
                    continue
                theta = (work[q, q] - work[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rowp = work[p].copy()
                rowq = work[q].copy()
                work[p] = c * rowp - s * rowq
                work[q] = s * rowp + c * rowq
                colp = work[:, p].copy()
                colq = work[:, q].copy()
                work[:, p] = c * colp - s * colq
                work[:, q] = s * colp + c * colq
                work[p, q] = work[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")


def dense_singular_values(A):
    """Singular values (descending) via the Jacobi oracle on A'A."""
    A = np.asarray(A, dtype=float)
    lams, _ = dense_sym_eigen(A.T @ A)
    return np.sqrt(np.clip(lams, 0.0, None))[::-1]


def numerical_rank(A, rtol=1e-8):
    """Count of singular values above rtol * sigma_max."""
    svals = dense_singular_values(A)
    if svals.size == 0 or svals[0] == 0.0:
        return 0
    return int(np.sum(svals > rtol * svals[0]))


@dataclass(frozen=True)
class Lemma1Report:
    """Margins for the Hankel singular-value and trace-norm bounds."""

    singular_margins: np.ndarray
    trace_margin: float

    @property
    def ok(self):
        return bool(np.all(self.singular_margins >= 0.0) and self.trace_margin >= 0.0)


def check_lemma1(H, coeffs):
    """Check sigma_j(H) <= sum_{t>=j+1} |b_t| and ||H||_1 <= 2 sum_l l |b_l|.

    ``coeffs`` uses the same t = j + k indexing as :func:`hankel`; the
    input matrix must be exactly the Hankel matrix of those coefficients.
    """
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square Hankel matrix, got shape {H.shape}")
    n = H.shape[0]
    b = np.asarray(coeffs, dtype=float)
    if b.shape[0] < 2 * n + 1 or not np.array_equal(H, hankel(b, n)):
        raise ValueError("input is not the Hankel matrix of the given coefficients")

    svals = dense_singular_values(H)
    absb = np.abs(b[: 2 * n + 1])
    # bound for the j-th singular value (1-based j): tail sum from t = j+1
    tails = np.concatenate([np.cumsum(absb[::-1])[::-1], [0.0]])
    sv_bounds = np.array([tails[j + 1] for j in range(1, n + 1)])
    trace_bound = 2.0 * float(np.sum(np.arange(2 * n + 1) * absb))
    return Lemma1Report(
        singular_margins=sv_bounds - svals,
        trace_margin=trace_bound - float(np.sum(svals)),
    )


@dataclass(frozen=True)
class Lemma2Report:
    """Rank and trace-norm comparison of a circulant against its Toeplitz."""

    rank: int
    rank_bound: int
    trace_norm: float
    trace_bound: float

    @property
    def ok(self):
        return self.rank <= self.rank_bound and self.trace_norm <= self.trace_bound


def check_lemma2(symbol, n, rank_rtol=1e-8):
    """Check rank(C_n - T_n) <= 2N and the trace-norm bound for a banded symbol."""
    N = symbol.halfwidth
    if 2 * N >= n:
        raise ValueError(f"symbol too wide: need 2N < n, got N={N}, n={n}")
    D = circulant(symbol, n) - toeplitz(symbol, n)
    svals = dense_singular_values(D)
    smax = svals[0] if svals.size else 0.0
    rank = int(np.sum(svals > rank_rtol * smax)) if smax > 0 else 0
    js = np.arange(1, N + 1)
    bound = 2.0 * float(np.sum((js + 1) * np.abs(symbol.coeffs[N + 1:])))
    return Lemma2Report(
        rank=rank,
        rank_bound=2 * N,
        trace_norm=float(np.sum(svals)),
        trace_bound=bound,
    )
