"""Minimum enclosing ball by Welzl's move-to-front recursion.

The point order is a fixed-seed permutation, so results are reproducible.
Support sets have at most d + 1 points; their circumcenter is solved in the
affine hull of the support (least squares when the support is degenerate).
The returned radius is recomputed as the largest distance from the center,
so every input point is enclosed regardless of rounding in the recursion.
"""

import sys

import numpy as np


def _circumball(R):
    R = np.asarray(R, dtype=float)
    if R.shape[0] == 1:
        return R[0].copy(), 0.0
    r0 = R[0]
    D = R[1:] - r0
    M = D @ D.T
    b = 0.5 * np.einsum("ij,ij->i", D, D)
    alpha, *_ = np.linalg.lstsq(M, b, rcond=None)
    c = r0 + alpha @ D
    return c, float(np.max(np.linalg.norm(R - c, axis=1)))


def _welzl(P, n, R, d):
    if n == 0 or len(R) == d + 1:
        if not R:
            return None, -1.0
        return _circumball(R)
    c, r = _welzl(P, n - 1, R, d)
    p = P[n - 1]
    if c is not None and np.linalg.norm(p - c) <= r * (1.0 + 1e-12) + 1e-15:
        return c, r
    return _welzl(P, n - 1, R + [p], d)


def min_enclosing_ball(points, seed: int = 0) -> tuple[np.ndarray, float]:
    """Smallest ball containing ``points``; returns ``(center, radius)``."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    _, idx = np.unique(P, axis=0, return_index=True)
    P = P[np.sort(idx)]
    if P.shape[0] == 1:
        return P[0].copy(), 0.0
    order = np.random.default_rng(seed).permutation(P.shape[0])
    Q = P[order]
    need = Q.shape[0] + 50
    old = sys.getrecursionlimit()
    if need * 2 > old:
        sys.setrecursionlimit(need * 2 + 1000)
    try:
        c, _ = _welzl(Q, Q.shape[0], [], P.shape[1])
    finally:
        sys.setrecursionlimit(old)
    r = float(np.max(np.linalg.norm(P - c, axis=1)))
    return c, r
