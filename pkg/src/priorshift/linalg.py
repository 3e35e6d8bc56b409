"""Small dense kernels used by the likelihood-recovery path.

Matrices are plain 2-D ``float64`` numpy arrays stored row-major. Nothing here
tries to be a general eigensolver: every routine assumes the structure that
the adaptation matrices actually have.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

__all__ = [
    "DimensionError",
    "EigenSolverError",
    "as_dense",
    "matvec",
    "power_iteration",
    "shifted_power_iteration",
    "gram_smallest_eigvec",
]


class DimensionError(ValueError):
    """Raised when array shapes are incompatible."""


class EigenSolverError(RuntimeError):
    """Raised when an eigenvector cannot be extracted."""


def as_dense(m, square=False):
    """Return ``m`` as a finite 2-D float64 array."""
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {a.shape}")
    if square and a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def matvec(m, x):
    """Matrix-vector product with a shape check."""
    a = as_dense(m)
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != a.shape[1]:
        raise DimensionError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} matrix by vector of shape {v.shape}"
        )
    return a @ v


def _l1_normalize(x):
    return x / x.sum()


def power_iteration(a, tol=1e-13, max_iter=10_000):
    """Dominant eigenvector of a positive column-stochastic matrix.

    Starts from the uniform vector and repeatedly applies ``a``. Because the
    columns of ``a`` sum to one, the L1 mass of a positive iterate is
    preserved; the explicit renormalization only removes rounding drift.

    Parameters
    ----------
    a : (n, n) array_like
        Strictly positive matrix with unit column sums.
    tol : float
        Stop once ``||x_{k+1} - x_k||_1 < tol``.
    max_iter : int
        Iteration cap.

    Returns
    -------
    x : (n,) ndarray
        L1-normalized iterate.
    iterations : int
    converged : bool
    """
    a = as_dense(a, square=True)
    n = a.shape[0]
    x = np.full(n, 1.0 / n)
    for k in range(1, max_iter + 1):
        y = _l1_normalize(a @ x)
        if np.abs(y - x).sum() < tol:
            return y, k, True
        x = y
    return x, max_iter, False


def shifted_power_iteration(m, delta, tol=1e-13, max_iter=10_000):
    """Power iteration on ``(delta*I - m)^{-1}`` for a generator matrix ``m``.

    ``m`` has nonnegative off-diagonal entries and zero column sums, i.e.
    ``m + I`` is column-stochastic. For ``delta > 0`` the matrix
    ``delta*I - m`` is a nonsingular M-matrix whose inverse is positive and
    shares its Perron vector with ``m + I``; the dominant eigenvalue becomes
    ``1/delta`` while every other one is at most ``1/(delta + gap)``, so the
    iteration contracts by ``delta/(delta + gap)`` per step instead of
    ``1 - gap``.

    Returns the same ``(x, iterations, converged)`` triple as
    :func:`power_iteration`.
    """
    m = as_dense(m, square=True)
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    n = m.shape[0]
    op = -m
    op[np.diag_indices(n)] += delta
    lu = scipy.linalg.lu_factor(op, check_finite=False)
    x = np.full(n, 1.0 / n)
    for k in range(1, max_iter + 1):
        y = scipy.linalg.lu_solve(lu, x, check_finite=False)
        s = y.sum()
        if not np.isfinite(s) or s <= 0:
            raise EigenSolverError("shifted operator is numerically singular")
        y = y / s
        if np.abs(y - x).sum() < tol:
            return y, k, True
        x = y
    return x, max_iter, False


def gram_smallest_eigvec(m, sigma=1e-12, tol=1e-14, max_iter=200):
    """Eigenvector of ``m.T @ m`` with the smallest eigenvalue.

    Inverse iteration on ``m.T @ m + sigma*I``. The result is sign-aligned to
    be positive and L1-normalized so it can be compared directly with the
    output of :func:`power_iteration`.

    Raises
    ------
    EigenSolverError
        If the iteration does not settle or the vector has mixed signs.
    """
    m = as_dense(m, square=True)
    n = m.shape[0]
    g = m.T @ m
    g[np.diag_indices(n)] += sigma
    try:
        lu = scipy.linalg.lu_factor(g, check_finite=False)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise EigenSolverError(str(exc)) from exc
    x = np.full(n, 1.0 / np.sqrt(n))
    for _ in range(max_iter):
        y = scipy.linalg.lu_solve(lu, x, check_finite=False)
        norm = np.linalg.norm(y)
        if not np.isfinite(norm) or norm == 0:
            raise EigenSolverError("Gram inverse iteration broke down")
        y = y / norm
        if y.sum() < 0:
            y = -y
        if np.abs(y - x).max() < tol:
            x = y
            break
        x = y
    else:
        raise EigenSolverError(f"Gram inverse iteration did not converge in {max_iter} steps")
    if np.any(x <= 0):
        raise EigenSolverError("smallest Gram eigenvector is not strictly positive")
    return _l1_normalize(x)
