"""Symmetric positive definite solves with a jitter ladder, plus vec helpers."""

import numpy as np
from scipy.linalg import cho_solve

from .exceptions import FactorizationError

# Relative diagonal jitter tried in order before a factorization is declared failed.
JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8)


def sym(a):
    """Symmetric part of a square matrix."""
    return 0.5 * (a + a.T)


def vec(m):
    """Column-major vectorization."""
    return np.asarray(m, dtype=float).reshape(-1, order="F")


def unvec(v, n, d):
    """Inverse of vec for an (n, d) matrix."""
    return np.asarray(v, dtype=float).reshape((n, d), order="F")


def spd_cholesky(a, what="matrix"):
    """Lower Cholesky factor of a symmetric positive definite matrix.

    Retries with small diagonal jitter (relative to trace/n) before raising;
    scale matrices can come out numerically semidefinite for very short
    samples.
    """
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise FactorizationError(f"{what} contains non-finite entries")
    k = a.shape[0]
    scale = np.trace(a) / k if k else 1.0
    if not scale > 0.0:
        scale = 1.0
    eye = np.eye(k)
    for jitter in JITTER_LADDER:
        try:
            return np.linalg.cholesky(a + (jitter * scale) * eye)
        except np.linalg.LinAlgError:
            continue
    raise FactorizationError(f"{what} is not positive definite (jitter ladder exhausted)")


def spd_solve(a, b, what="matrix"):
    """Solve a @ x = b for symmetric positive definite a."""
    return cho_solve((spd_cholesky(a, what), True), np.asarray(b, dtype=float))


def spd_inverse(a, what="matrix"):
    """Inverse of a symmetric positive definite matrix, symmetrized."""
    return sym(spd_solve(a, np.eye(np.asarray(a).shape[0]), what))


def spd_logdet(a, what="matrix"):
    """Log-determinant of a symmetric positive definite matrix."""
    factor = spd_cholesky(a, what)
    return 2.0 * float(np.sum(np.log(np.diag(factor))))
