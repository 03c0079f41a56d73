"""Small dense linear-algebra helpers used throughout the package.

Everything here works on plain complex numpy arrays; entropies are in bits.
"""

import numpy as np

# Eigenvalues below this are treated as exact zeros inside entropies.
EIG_FLOOR = 1e-14


def dagger(a):
    return np.asarray(a).conj().T


def hermitize(a):
    """Average a matrix with its adjoint (kills numerical anti-Hermitian drift)."""
    return 0.5 * (a + a.conj().T)


def max_abs(a):
    return float(np.max(np.abs(a)))


def is_hermitian(a, tol=1e-10):
    return max_abs(a - dagger(a)) < tol


def partial_trace(mat, d_first, d_second, keep):
    """Partial trace of a bipartite matrix on C^(d_first) x C^(d_second).

    keep=0 traces out the second factor, keep=1 the first.
    """
    t = np.asarray(mat).reshape(d_first, d_second, d_first, d_second)
    if keep == 0:
        return np.einsum("ikjk->ij", t)
    if keep == 1:
        return np.einsum("kikj->ij", t)
    raise ValueError("keep must be 0 or 1")


def trace_distance(a, b):
    """(1/2)||a - b||_1 for Hermitian matrices."""
    vals = np.linalg.eigvalsh(hermitize(np.asarray(a) - np.asarray(b)))
    return 0.5 * float(np.sum(np.abs(vals)))


def clipped_eigvalsh(rho, neg_tol=1e-10):
    """Eigenvalues of a Hermitian matrix with small negatives clipped to zero.

    Raises ValueError if an eigenvalue is below -neg_tol; callers wrap this
    into their own error types.
    """
    vals = np.linalg.eigvalsh(hermitize(rho))
    if vals[0] < -neg_tol:
        raise ValueError(f"eigenvalue {vals[0]:.3e} below -{neg_tol:.1e}")
    return np.clip(vals, 0.0, None)


def shannon_entropy_bits(p):
    """Shannon entropy (base 2) of a nonnegative weight vector; 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    mask = p > EIG_FLOOR
    return float(-np.sum(p[mask] * np.log2(p[mask])))


def von_neumann_entropy(rho, neg_tol=1e-10):
    """Von Neumann entropy in bits via eigendecomposition."""
    return shannon_entropy_bits(clipped_eigvalsh(rho, neg_tol))
