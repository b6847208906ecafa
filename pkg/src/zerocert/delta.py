"""Two-sided bounds on the convexity defect

    delta(X) = inf over convex psi on X of  osc_X (|x|^2 + psi(x)),

where ``osc`` is sup minus inf over X.

Lower bounds
------------
*Analytic floor* ``diam(X)^2 / 4``. For a, b in X and any convex psi,
``f = |x|^2 + psi`` satisfies ``f(a) + f(b) - 2 f((a+b)/2) >= |a|^2 + |b|^2 -
2|(a+b)/2|^2 = |a-b|^2 / 2`` (midpoint convexity of psi), so
``osc f >= (f(a)+f(b))/2 - f((a+b)/2) >= |a-b|^2 / 4``. On a segment the bound is
attained by ``psi(t) = -c t`` along the segment, so ``delta(seg) = |b-a|^2/4``.

*Grid LP.* Restricting psi to grid points gives finite data (x_i, psi_i, g_i)
that must satisfy ``psi_j >= psi_i + <g_i, x_j - x_i>``; the smallest sampled
oscillation over such data is an LP whose optimum never exceeds delta(X).
The LP is solved through its dual, whose simplex multipliers are the data
itself; any dual-feasible point already certifies a lower bound by weak
duality, and interpolation pairs are generated lazily until the recovered
data satisfies every pair (so the final witness is exactly LP-optimal).

Upper bounds
------------
*Recentering*: ``psi(x) = |c|^2 - 2<c, x>`` gives ``|x|^2 + psi = |x - c|^2``,
whose oscillation over X is at most the squared radius of the smallest ball
centered in X that contains X. With c the minimum-enclosing-ball center of
the extreme points the bound is that squared radius.

*Extension*: the max-of-affine extension of interpolable data is convex on X,
so its exact oscillation (sup at the extreme points, inf from a certified
convex minimization) bounds delta from above.
"""

from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .config import current
from .errors import NonConvergence, NotInterpolable
from .optim.convex import minimize_convex
from .optim.lp import LinearProgram, solve_lp
from .optim.meb import min_enclosing_ball


@dataclass(frozen=True, eq=False)
class PsiData:
    """Finite convex data: values ``psi_i`` and subgradients ``g_i`` at ``points``."""

    points: np.ndarray
    values: np.ndarray
    subgradients: np.ndarray

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.points, dtype=float))
        v = np.asarray(self.values, dtype=float).ravel()
        g = np.asarray(self.subgradients, dtype=float).reshape(P.shape)
        if v.size != P.shape[0]:
            raise ValueError("points, values and subgradients must share length")
        for a in (P, v, g):
            a.setflags(write=False)
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "subgradients", g)

    def violations(self):
        """Matrix of ``psi_i + <g_i, x_j - x_i> - psi_j`` (positive entries break convexity)."""
        P, v, g = self.points, self.values, self.subgradients
        lin = g @ P.T - np.einsum("ij,ij->i", g, P)[:, None]  # <g_i, x_j - x_i>
        V = v[:, None] + lin - v[None, :]
        np.fill_diagonal(V, 0.0)
        return V

    def max_violation(self) -> float:
        return float(max(0.0, self.violations().max()))

    def is_interpolable(self, tol: float = 1e-8) -> bool:
        return self.max_violation() <= tol

    def check(self, tol=1e-8):
        worst = self.max_violation()
        if worst > tol:
            raise NotInterpolable(f"convex interpolation violated by {worst:.3e} (> {tol:.1e})")

    def extension(self, x) -> tuple[float, np.ndarray]:
        """Max-of-affine convex extension evaluated at ``x``, with an active subgradient."""
        x = np.asarray(x, dtype=float)
        vals = self.values + self.subgradients @ x - np.einsum("ij,ij->i", self.subgradients, self.points)
        k = int(np.argmax(vals))
        return float(vals[k]), self.subgradients[k]

    def sampled_oscillation(self) -> float:
        f = np.einsum("ij,ij->i", self.points, self.points) + self.values
        return float(f.max() - f.min())

    @classmethod
    def zero(cls, points):
        P = np.atleast_2d(np.asarray(points, dtype=float))
        return cls(P, np.zeros(P.shape[0]), np.zeros_like(P))


@dataclass(frozen=True, eq=False)
class DeltaBounds:
    lower: float
    upper: float
    lower_witness: PsiData
    upper_witness: object  # center vector (recentering) or PsiData (extension)
    upper_method: str
    resolution: int
    slack: dict = field(default_factory=dict)

    @property
    def width(self) -> float:
        return self.upper - self.lower


def delta_segment_exact(seg: geo.Segment) -> float:
    """Closed form ``|b - a|^2 / 4`` for a segment."""
    d = seg.b - seg.a
    return float(d @ d) / 4.0


def analytic_floor(body: geo.ConvexBody) -> float:
    return geo.diameter_squared(body) / 4.0


def subgradient_box(points, body):
    """Initial box on LP subgradients; widened whenever its multipliers do not cancel."""
    return 2.0 * float(np.linalg.norm(points, axis=1).max()) + 10.0 * geo.diameter(body)


@dataclass(frozen=True)
class LpDiagnostics:
    rounds: int
    pairs_used: int
    iterations: int
    box_enlargements: int
    certified_lower: float
    dual_residual: float


class _DualDeltaLP:
    """Dual of the grid LP restricted to a set of interpolation pairs.

    Primal (variables psi_2..psi_m, g_i in [-G, G]^d, c, t; psi_1 = 0):
        min t  s.t.  psi_i - psi_j + <g_i, x_j - x_i> <= 0   for pairs (i, j)
                     c - psi_i <= |x_i|^2,   psi_i - c - t <= -|x_i|^2.
    Dual rows follow the primal variables in that order; columns are the
    pair multipliers, then alpha (lower band), beta (upper band), then the
    multipliers of g <= G and -g <= G.
    """

    def __init__(self, X, G):
        self.X = X
        self.m, self.d = X.shape
        self.G = G
        self.sq = np.einsum("ij,ij->i", X, X)

    def build(self, pairs):
        X, m, d = self.X, self.m, self.d
        npair = len(pairs)
        nrow = (m - 1) + m * d + 2
        ncol = npair + 2 * m + 2 * m * d
        A = np.zeros((nrow, ncol))
        rc, rt = m - 1 + m * d, m + m * d
        I = pairs[:, 0]
        J = pairs[:, 1]
        cols = np.arange(npair)
        sel = I > 0
        A[I[sel] - 1, cols[sel]] += 1.0
        sel = J > 0
        A[J[sel] - 1, cols[sel]] -= 1.0
        diff = X[J] - X[I]
        for k in range(d):
            A[m - 1 + I * d + k, cols] = diff[:, k]
        a0, b0 = npair, npair + m
        idx = np.arange(1, m)
        A[idx - 1, a0 + idx] = -1.0
        A[idx - 1, b0 + idx] = 1.0
        A[rc, a0:a0 + m] = 1.0
        A[rc, b0:b0 + m] = -1.0
        A[rt, b0:b0 + m] = -1.0
        r0 = npair + 2 * m
        gi = np.arange(m * d)
        A[m - 1 + gi, r0 + gi] = 1.0
        A[m - 1 + gi, r0 + m * d + gi] = -1.0
        rhs = np.zeros(nrow)
        rhs[rt] = -1.0
        cost = np.concatenate([np.zeros(npair), self.sq, -self.sq, np.full(2 * m * d, self.G)])
        # feasible start: alpha_k on psi rows, rho+ on g rows, alpha_1 / beta_1 on c / t
        basis = [a0 + k for k in range(1, m)]
        basis += [r0 + i for i in range(m * d)]
        basis += [a0, b0]
        # the t row reads -sum(beta) = -1, flipped to +; beta_1 enters with +1 there
        return LinearProgram(c=cost, A_eq=A, b_eq=rhs), basis

    def recover(self, duals):
        m, d = self.m, self.d
        psi = np.concatenate([[0.0], duals[:m - 1]])
        g = duals[m - 1:m - 1 + m * d].reshape(m, d)
        c = duals[m - 1 + m * d]
        t = duals[m + m * d]
        return psi, g, c, t


def _initial_pairs(X, k):
    m = X.shape[0]
    D = np.linalg.norm(X[:, None, :] - X[None, :, :], axis=2)
    np.fill_diagonal(D, np.inf)
    k = min(k, m - 1)
    near = np.argsort(D, axis=1, kind="stable")[:, :k]
    S = set()
    for i in range(m):
        for j in near[i]:
            S.add((i, int(j)))
            S.add((int(j), i))
    return S


def delta_lower_lp(body, grid, tol=None, max_rounds=60, return_diagnostics=False):
    """LP lower bound on delta over ``grid``; returns ``(lower, witness)``.

    ``witness`` is the optimal grid data (psi_1 pinned to 0), interpolable to
    ``tol.interpolation``.
    """
    tol = current() if tol is None else tol
    X = np.asarray(grid.points, dtype=float)
    m, d = X.shape
    if m == 1:
        diag = LpDiagnostics(0, 0, 0, 0, 0.0, 0.0)
        out = (0.0, PsiData.zero(X))
        return out + (diag,) if return_diagnostics else out
    G = subgradient_box(X, body)
    pairs = _initial_pairs(X, 2 * d + 2)
    scale = max(1.0, float(np.einsum("ij,ij->i", X, X).max()))
    iters = 0
    enlargements = 0
    for rounds in range(1, max_rounds + 1):
        dual = _DualDeltaLP(X, G)
        P = np.array(sorted(pairs), dtype=int)
        lp, basis = dual.build(P)
        sol = solve_lp(lp, tol=tol, start_basis=basis)
        iters += sol.iterations
        if not sol.optimal:
            raise ArithmeticError(f"delta LP ended {sol.status}")
        y = sol.x
        n_free = len(P) + 2 * m
        net = y[n_free:n_free + m * d] - y[n_free + m * d:]
        if np.abs(net).max(initial=0.0) > 1e-9:
            # the box binds: the boxed value may exceed the grid LP, so widen it
            G *= 4.0
            enlargements += 1
            continue
        psi, g, c, t = dual.recover(sol.duals_eq)
        data = PsiData(X, psi, g)
        V = data.violations()
        bad = np.argwhere(V > 1e-11 * scale)
        fresh = [(int(i), int(j)) for i, j in bad if (int(i), int(j)) not in pairs]
        if not fresh:
            break
        # most violated first, bounded growth per round
        fresh.sort(key=lambda ij: -V[ij])
        pairs.update(fresh[: max(4 * m, 64)])
    else:
        raise ArithmeticError(f"delta LP pair generation did not settle in {max_rounds} rounds")

    # Certificate: the pair/band multipliers alone (box multipliers cancel) are
    # dual feasible for the unboxed grid LP up to the residual below.
    yc = y[:n_free]
    A_c = lp.A_eq[:, :n_free]
    resid = float(np.abs(A_c @ yc - lp.b_eq).max())
    terms = lp.c[:n_free] * yc
    certified = float(-terms.sum())
    # rounding allowance: summation error plus residual times a bound on the
    # primal variables (|psi|, |c|, t are at most a few times max |x|^2 once
    # psi_1 = 0 and the data is optimal)
    allowance = 1e-12 * max(1.0, float(np.abs(terms).sum())) + resid * m * 4.0 * scale
    value = max(0.0, certified - allowance)
    data.check(tol.interpolation)
    diag = LpDiagnostics(rounds, len(pairs), iters, enlargements, certified, resid)
    out = (value, data)
    return out + (diag,) if return_diagnostics else out


def delta_upper_recenter(body: geo.ConvexBody) -> tuple[float, np.ndarray]:
    """Upper bound from ``psi = |c|^2 - 2<c, x>``; returns ``(upper, c)``.

    For any center c the oscillation of ``|x - c|^2`` over X is at most its
    maximum, which for a polytope is attained at a vertex. The minimum
    enclosing ball center of the extreme points minimizes that maximum.
    """
    if isinstance(body, geo.Ball):
        return body.radius ** 2, body.center.copy()
    E = np.asarray(geo.extreme_points(body))
    c, _ = min_enclosing_ball(E)
    upper = float(np.max(np.einsum("ij,ij->i", E - c, E - c)))
    return upper, c


def delta_upper_extension(body, witness, tol=None):
    """Oscillation of ``|x|^2 + max-of-affine(witness)`` over X; returns ``(upper, slack)``.

    The sup is exact (convex function, taken at extreme points); the inf is a
    certified lower estimate ``value - slack``.
    """
    if isinstance(body, geo.Ball):
        raise geo.UnsupportedVariant("extension bound is not computed for balls")
    tol = current().convex_slack if tol is None else tol
    witness.check(current().interpolation)
    E = np.asarray(geo.extreme_points(body))
    if E.shape[0] == 1:
        return 0.0, 0.0

    def F(x):
        v, g = witness.extension(x)
        return float(x @ x) + v, 2.0 * x + g

    sup = max(F(v)[0] for v in E)
    _, val, slack = minimize_convex(F, body, tol)
    return sup - (val - slack), slack


def _ball_lp_grid(ball, resolution):
    c, r, d = ball.center, ball.radius, ball.dim
    if d == 2:
        n = min(32, max(8, 4 * resolution))
        th = 2 * np.pi * np.arange(n) / n
        pts = c + r * np.column_stack([np.cos(th), np.sin(th)])
    else:
        E = np.eye(d)
        pts = np.vstack([c + r * E, c - r * E])
    pts = np.vstack([c[None, :], pts])
    return geo.SampleGrid(ball, pts, r, resolution)


def _recenter_witness(body, c):
    """Grid data for the affine recentering function on the body's vertices."""
    P = np.asarray(geo.extreme_points(body)) if not isinstance(body, geo.Ball) else c[None, :]
    vals = float(c @ c) - 2.0 * P @ c
    return PsiData(P, vals - vals[0], np.repeat(-2.0 * c[None, :], P.shape[0], axis=0))


def delta_bounds(body: geo.ConvexBody, resolution: int = 8, tol: float | None = None) -> DeltaBounds:
    """Certified bracket ``lower <= delta(X) <= upper`` (see module doc)."""
    tol = current() if tol is None else tol
    floor = analytic_floor(body)
    if floor == 0.0:
        P = body.center[None, :] if isinstance(body, geo.Ball) else np.asarray(geo.extreme_points(body))[:1]
        W = PsiData.zero(P)
        return DeltaBounds(0.0, 0.0, W, P[0].copy(), "singleton", resolution, {"floor": 0.0})
    if isinstance(body, geo.Segment):
        exact = delta_segment_exact(body)
        c = 0.5 * (body.a + body.b)
        W = _recenter_witness(body, c)
        return DeltaBounds(exact, exact, W, c, "segment-exact", resolution,
                           {"floor": floor, "recenter": exact})

    rec, c = delta_upper_recenter(body)
    slack = {"floor": floor, "recenter": rec}
    grid = _ball_lp_grid(body, resolution) if isinstance(body, geo.Ball) else geo.sample(body, resolution)
    lp_val, W, diag = delta_lower_lp(body, grid, tol, return_diagnostics=True)
    slack.update(lp=lp_val, lp_rounds=diag.rounds, lp_pairs=diag.pairs_used,
                 lp_box_enlargements=diag.box_enlargements, grid_points=len(grid))
    lower = max(lp_val, floor)
    upper, method, witness = rec, "recenter", c
    if not isinstance(body, geo.Ball):
        try:
            ext, ext_slack = delta_upper_extension(body, W, tol.convex_slack)
        except NonConvergence as exc:
            slack["extension_error"] = str(exc)
        else:
            slack.update(extension=ext, extension_slack=ext_slack)
            if ext < upper:
                upper, method, witness = ext, "extension", W
    return DeltaBounds(lower, upper, W, witness, method, resolution, slack)
