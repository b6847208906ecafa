# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Must stay call-compatible with ``_pykernels``."""

from libc.math cimport sqrt, fabs


def pivot(double[:, ::1] T, Py_ssize_t r, Py_ssize_t c):
    """Gauss-Jordan pivot of the dense tableau ``T`` on entry (r, c), in place."""
    cdef Py_ssize_t nrow = T.shape[0], ncol = T.shape[1]
    cdef Py_ssize_t i, j
    cdef double inv = 1.0 / T[r, c]
    cdef double f
    for j in range(ncol):
        T[r, j] *= inv
    T[r, c] = 1.0
    for i in range(nrow):
        if i == r:
            continue
        f = T[i, c]
        if f == 0.0:
            continue
        for j in range(ncol):
            T[i, j] -= f * T[r, j]
        T[i, c] = 0.0


def power_iteration(double[:, ::1] A, double[::1] x0, double rtol, Py_ssize_t maxiter):
    """Largest eigenvalue of the symmetric PSD matrix ``A`` by power iteration.

    Returns ``(value, iterations, converged)``.
    """
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t i, j, it
    cdef double nrm, lam = 0.0, lam_prev = -1.0, s
    cdef double[::1] x = x0.copy()
    cdef double[::1] y = x0.copy()

    nrm = 0.0
    for i in range(n):
        nrm += x[i] * x[i]
    nrm = sqrt(nrm)
    if nrm == 0.0:
        return 0.0, 0, True
    for i in range(n):
        x[i] /= nrm

    for it in range(1, maxiter + 1):
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += A[i, j] * x[j]
            y[i] = s
        # Rayleigh quotient with unit x
        lam = 0.0
        nrm = 0.0
        for i in range(n):
            lam += x[i] * y[i]
            nrm += y[i] * y[i]
        nrm = sqrt(nrm)
        if nrm == 0.0:
            return 0.0, it, True
        for i in range(n):
            x[i] = y[i] / nrm
        if fabs(lam - lam_prev) <= rtol * fabs(lam):
            return lam, it, True
        lam_prev = lam
    return lam, maxiter, False
