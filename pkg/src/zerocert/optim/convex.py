"""Certified minimization of a convex function over a body.

``f(x)`` must return ``(value, subgradient)``. Every method returns
``(argmin, value, slack)`` with ``value - slack <= inf f`` guaranteed by
subgradient cuts, which underestimate a convex function everywhere:

* Segment: golden-section search on the 1-D restriction keeps a minimizer in
  the bracket; the cuts at the bracket ends (and at the best point) are then
  minimized exactly over the bracket.
* Polytope: Kelley's cutting-plane method over the vertex simplex; each model
  minimum is an LP and a valid lower bound.
* Ball: projected subgradient steps; the bound is the best single cut
  minimized in closed form over the ball.
"""

from math import sqrt

import numpy as np

from .. import geometry as geo
from ..config import current
from ..errors import NonConvergence, UnsupportedVariant
from .lp import LinearProgram, solve_lp

_INVPHI = (sqrt(5.0) - 1.0) / 2.0


def minimize_convex(f, body: geo.ConvexBody, tol: float | None = None, max_iter: int | None = None):
    """Return ``(argmin, value, slack)`` with ``value - slack <= inf_body f``."""
    tol = current().convex_slack if tol is None else float(tol)
    if isinstance(body, geo.Segment):
        return _segment(f, body, tol, max_iter or 400)
    if isinstance(body, geo.Polytope):
        return _polytope(f, body, tol, max_iter or 400)
    if isinstance(body, geo.Ball):
        return _ball(f, body, tol, max_iter or 20_000)
    raise UnsupportedVariant(f"cannot minimize over {type(body).__name__}")


def _cut_lower_bound_1d(cuts, lo, hi):
    """min over t in [lo, hi] of max_k (v_k + s_k (t - t_k))."""
    cand = [lo, hi]
    for i in range(len(cuts)):
        for j in range(i + 1, len(cuts)):
            ti, vi, si = cuts[i]
            tj, vj, sj = cuts[j]
            if si != sj:
                t = (vj - sj * tj - vi + si * ti) / (si - sj)
                if lo < t < hi:
                    cand.append(t)
    return min(max(v + s * (t - tk) for tk, v, s in cuts) for t in cand)


def _segment(f, seg, tol, max_iter):
    a, b = seg.a, seg.b
    u = b - a
    length = float(np.linalg.norm(u))
    if length == 0.0:
        v, _ = f(a)
        return a.copy(), float(v), 0.0

    cache = {}

    def phi(t):
        if t not in cache:
            v, s = f(a + t * u)
            cache[t] = (float(v), float(np.asarray(s) @ u))
        return cache[t]

    lo, hi = 0.0, 1.0
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    it = 0
    while (hi - lo) * length > tol and it < max_iter:
        it += 1
        if phi(c)[0] <= phi(d)[0]:
            hi, d = d, c
            c = hi - _INVPHI * (hi - lo)
        else:
            lo, c = c, d
            d = lo + _INVPHI * (hi - lo)
    ts = [lo, hi, c, d]
    best = min(ts, key=lambda t: phi(t)[0])
    val = phi(best)[0]
    cuts = [(t, *phi(t)) for t in ts]
    lower = _cut_lower_bound_1d(cuts, lo, hi)
    slack = max(0.0, val - lower)
    if slack > max(tol, 1e-12 * max(1.0, abs(val))) and (hi - lo) * length > tol:
        raise NonConvergence(
            "golden-section search hit its iteration cap",
            {"bracket": (lo, hi), "value": val, "slack": slack},
        )
    return a + best * u, val, slack


def _polytope(f, body, tol, max_iter):
    V = np.asarray(geo.extreme_points(body))
    k = V.shape[0]
    if k == 1:
        v, _ = f(V[0])
        return V[0].copy(), float(v), 0.0
    xs = [V[i] for i in range(k)] + [V.mean(axis=0)]
    cuts_x, cuts_v, cuts_s = [], [], []
    best_x, best_v = None, np.inf

    def add(x):
        nonlocal best_x, best_v
        v, s = f(x)
        v = float(v)
        cuts_x.append(np.asarray(x, dtype=float))
        cuts_v.append(v)
        cuts_s.append(np.asarray(s, dtype=float))
        if v < best_v:
            best_x, best_v = np.asarray(x, dtype=float).copy(), v

    for x in xs:
        add(x)
    lower = -np.inf
    for it in range(max_iter):
        # variables lam (k) >= 0, z free: min z, z >= v_j + <s_j, V'lam - x_j>
        S = np.array(cuts_s)
        off = np.array(cuts_v) - np.einsum("ij,ij->i", S, np.array(cuts_x))
        nc = S.shape[0]
        A_ub = np.hstack([S @ V.T, -np.ones((nc, 1))])
        b_ub = -off
        A_eq = np.concatenate([np.ones(k), [0.0]])[None, :]
        bounds = [(0.0, None)] * k + [(None, None)]
        c = np.zeros(k + 1)
        c[-1] = 1.0
        sol = solve_lp(LinearProgram(c=c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=bounds))
        lam = np.maximum(sol.x[:k], 0.0)
        lam /= lam.sum()
        x_new = V.T @ lam
        model = min(float(sol.objective), float(np.max(off + S @ x_new)))
        lower = max(lower, model - 1e-12 * max(1.0, abs(model)))
        if best_v - lower <= tol:
            return best_x, best_v, max(0.0, best_v - lower)
        add(x_new)
    raise NonConvergence(
        "cutting-plane method hit its iteration cap",
        {"value": best_v, "lower": lower, "argmin": best_x},
    )


def _ball(f, ball, tol, max_iter):
    c, r = ball.center, ball.radius
    if r == 0.0:
        v, _ = f(c)
        return c.copy(), float(v), 0.0
    x = c.copy()
    best_x, best_v, lower = None, np.inf, -np.inf
    for it in range(1, max_iter + 1):
        v, s = f(x)
        v = float(v)
        s = np.asarray(s, dtype=float)
        ns = float(np.linalg.norm(s))
        if v < best_v:
            best_x, best_v = x.copy(), v
        lower = max(lower, v + float(s @ (c - x)) - r * ns)
        if best_v - lower <= tol or ns == 0.0:
            return best_x, best_v, max(0.0, best_v - lower)
        step = 2.0 * r / (ns * sqrt(it))
        y = x - step * s
        off = y - c
        no = float(np.linalg.norm(off))
        x = y if no <= r else c + off * (r / no)
    raise NonConvergence(
        "projected subgradient hit its iteration cap",
        {"value": best_v, "lower": lower, "argmin": best_x},
    )
