"""Pure-numpy versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np


def pivot(T, r, c):
    """Gauss-Jordan pivot of the dense tableau ``T`` on entry (r, c), in place."""
    T[r] /= T[r, c]
    T[r, c] = 1.0
    col = T[:, c].copy()
    col[r] = 0.0
    rows = np.flatnonzero(col)
    if rows.size:
        T[rows] -= np.outer(col[rows], T[r])
        T[rows, c] = 0.0


def power_iteration(A, x0, rtol, maxiter):
    """Largest eigenvalue of the symmetric PSD matrix ``A`` by power iteration.

    Returns ``(value, iterations, converged)``.
    """
    x = np.array(x0, dtype=float)
    nrm = np.linalg.norm(x)
    if nrm == 0.0:
        return 0.0, 0, True
    x /= nrm
    lam_prev = -1.0
    lam = 0.0
    for it in range(1, maxiter + 1):
        y = A @ x
        lam = float(x @ y)
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            return 0.0, it, True
        x = y / nrm
        if abs(lam - lam_prev) <= rtol * abs(lam):
            return lam, it, True
        lam_prev = lam
    return lam, maxiter, False
