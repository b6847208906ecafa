"""Nearest point of a finite convex hull to the origin.

Away-step Frank-Wolfe over the weight simplex on ``|S' lam|^2``. The Wolfe
gap ``<p, p - s_fw>`` bounds the suboptimality of ``|p|^2`` and yields the
separation certificate ``min_i <s_i, p/|p|> = (|p|^2 - gap)/|p|``. Periodically
the active vertices are polished by the exact affine min-norm solve (the
minor cycle of Wolfe's algorithm) and, failing that, by a nonnegative least
squares solve with the sum-to-one row appended (Lawson-Hanson via scipy).
A polish is accepted only when it lowers the norm; this settles cases where
the minimum is the origin, including the origin on a hull facet, down to
rounding level.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from ..config import current


@dataclass(frozen=True, eq=False)
class MinNormResult:
    point: np.ndarray
    weights: np.ndarray
    norm: float
    dual_gap: float
    iterations: int = 0

    @property
    def separation_margin(self) -> float:
        """``min_i <s_i, y>`` lower bound for ``y = point/norm`` implied by the gap."""
        if self.norm == 0.0:
            return 0.0
        return (self.norm ** 2 - self.dual_gap) / self.norm


def _affine_min_norm(S):
    k = S.shape[0]
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = S @ S.T
    K[:k, k] = 1.0
    K[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
    mu = sol[:k]
    return mu


def min_norm_point(points, tol=None, zero_tol=0.0, max_iter=100_000, polish_every=25):
    """Min-norm point of conv(points); stops when the Wolfe gap is <= tol**2.

    With ``zero_tol > 0`` the iteration also stops as soon as the iterate
    norm is at most ``zero_tol`` (enough to decide hull membership).
    """
    S = np.atleast_2d(np.asarray(points, dtype=float))
    n = S.shape[0]
    if tol is None:
        tol = float(np.sqrt(current().fw_gap))
    gap_target = tol * tol
    scale = max(1.0, float(np.abs(S).max()))
    floor = max(zero_tol, 1e-15 * scale)

    sq = np.einsum("ij,ij->i", S, S)
    lam = np.zeros(n)
    lam[int(np.argmin(sq))] = 1.0
    p = S.T @ lam
    it = 0
    gap = np.inf
    while True:
        proj = S @ p
        pp = float(p @ p)
        i_fw = int(np.argmin(proj))
        gap = pp - float(proj[i_fw])
        if gap <= gap_target or np.sqrt(pp) <= floor or it >= max_iter:
            break
        it += 1
        active = np.flatnonzero(lam > 0.0)
        j_aw = int(active[np.argmax(proj[active])])
        away_gap = float(proj[j_aw]) - pp
        if gap >= away_gap or active.size == 1:
            d = S[i_fw] - p
            gmax = 1.0
            dd = float(d @ d)
            g = 1.0 if dd == 0.0 else min(gmax, max(0.0, -float(p @ d) / dd))
            lam *= 1.0 - g
            lam[i_fw] += g
        else:
            d = p - S[j_aw]
            gmax = lam[j_aw] / (1.0 - lam[j_aw])
            dd = float(d @ d)
            g = gmax if dd == 0.0 else min(gmax, max(0.0, -float(p @ d) / dd))
            lam *= 1.0 + g
            lam[j_aw] -= g
            if g == gmax:
                lam[j_aw] = 0.0
        lam = np.maximum(lam, 0.0)
        lam /= lam.sum()
        if it % polish_every == 0:
            lam = _polish(S, lam)
        p = S.T @ lam

    lam = _polish(S, lam)
    if n <= 4096:
        lam = _nnls_polish(S, lam, np.arange(n))
    p = S.T @ lam
    proj = S @ p
    gap = max(0.0, float(p @ p) - float(proj.min()))
    return MinNormResult(p, lam, float(np.linalg.norm(p)), gap, it)


def _nnls_polish(S, lam, idx):
    """Min-norm weights over ``S[idx]`` by NNLS on ``[S^T; w 1^T] mu = [0; w]``."""
    if idx.size < 2:
        return lam
    sub = S[idx]
    w = 1e3 * max(1.0, float(np.abs(sub).max()))
    A = np.vstack([sub.T, np.full((1, idx.size), w)])
    rhs = np.zeros(A.shape[0])
    rhs[-1] = w
    try:
        mu, _ = nnls(A, rhs, maxiter=50 * A.shape[1])
    except RuntimeError:
        return lam
    if mu.sum() <= 0.0 or not np.all(np.isfinite(mu)):
        return lam
    mu = mu / mu.sum()
    new = sub.T @ mu
    old = S.T @ lam
    if new @ new < old @ old:
        out = np.zeros_like(lam)
        out[idx] = mu
        return out
    return lam


def _polish(S, lam):
    active = np.flatnonzero(lam > 0.0)
    if active.size < 2:
        return lam
    mu = _affine_min_norm(S[active])
    if np.any(mu < 0.0) or not np.all(np.isfinite(mu)):
        return _nnls_polish(S, lam, active)
    mu = mu / mu.sum()
    old = S[active].T @ lam[active]
    new = S[active].T @ mu
    if new @ new < old @ old:
        out = np.zeros_like(lam)
        out[active] = mu
        return out
    return lam
