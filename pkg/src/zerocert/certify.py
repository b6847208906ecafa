"""Certificates built from delta brackets, hull certificates and Lipschitz data.

The quantitative statement behind every certificate: if Phi' is L-Lipschitz
on a convex X, then for any convex psi

    inf_X |Phi| - dist(0, conv Phi(X)) <= (L/2) osc_X(|x|^2 + psi),

so ``dist(0, conv Phi(X)) >= eta_X - L delta_X / 2`` with ``eta_X = inf_X |Phi|``.
Two readings are used:

* near-zero: if 0 is (within r of) the hull, ``inf_X |Phi| <= L delta_X/2 + r``;
* separation: if ``delta_X < 2 eta / L``, the hull stays at distance at least
  ``eta - L delta_X / 2 > 0`` from the origin.
"""

from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from . import geometry as geo
from .config import current
from .delta import delta_bounds, delta_segment_exact
from .errors import ContainmentError, NoCertificate, UnsupportedVariant
from .minimax import hull_certificate, hull_certificate_from_images
from .operators import OperatorHandle, cospi, estimate_map_lipschitz, make_catalog_operator, sinpi
from .optim.minnorm import min_norm_point

PREMISE_VERIFIED = "premise-holds-conclusion-verified"
PREMISE_FAILS = "premise-fails-no-claim"
VIOLATION = "VIOLATION"


@dataclass(frozen=True)
class EtaBound:
    value: float
    grid_min: float
    modulus: float
    covering_radius: float
    certified: bool


def eta_lower_bound(op: OperatorHandle, body, resolution: int) -> EtaBound:
    """``max(0, min_grid |Phi| - M h)`` with M the map modulus on the body."""
    grid = geo.sample(body, resolution)
    norms = np.linalg.norm(np.atleast_2d(op.eval(grid.points)), axis=1)
    grid_min = float(norms.min())
    M = estimate_map_lipschitz(op, body, grid)
    value = max(0.0, grid_min - M.value * grid.covering_radius)
    return EtaBound(value, grid_min, M.value, grid.covering_radius, M.certified)


def _require_inside(X, V):
    tol = 1e-12
    if isinstance(X, geo.Ball):
        if isinstance(V, geo.Ball):
            ok = np.linalg.norm(X.center - V.center) + X.radius <= V.radius + tol
        else:
            # sufficient test: the bounding cube of the ball lies in V
            lo, hi = geo.bounding_box(X)
            corners = np.array(np.meshgrid(*zip(lo, hi))).reshape(X.dim, -1).T
            ok = all(geo.contains(V, p, tol) for p in corners)
    else:
        ok = all(geo.contains(V, p, tol) for p in geo.extreme_points(X))
    if not ok:
        raise ContainmentError("body X is not contained in region V")


def _known_L(op, L):
    if L is not None:
        return float(L), "user-asserted"
    if op.known_grad_lipschitz is None:
        raise UnsupportedVariant(f"{op.name} has no known Lipschitz constant for its derivative")
    return float(op.known_grad_lipschitz), "known"


@dataclass(frozen=True, eq=False)
class Theorem12Verdict:
    verdict: str
    eta: EtaBound
    delta_upper: float
    L: float
    threshold: float
    premise: bool
    hull: object = None
    sup_inf: float | None = None
    required_margin: float | None = None


def check_theorem12(op: OperatorHandle, X, V, resolution: int = 16, tol: float | None = None,
                    L: float | None = None) -> Theorem12Verdict:
    """Consistency harness for ``delta_X < 2 eta / L  =>  0 outside conv Phi(X)``.

    When the premise holds, the sampled hull must be a separation whose
    distance to the origin is at least ``eta_lb - L delta_up / 2``; anything
    else is reported as a violation.
    """
    tol = current().hull if tol is None else tol
    L, _ = _known_L(op, L)
    _require_inside(X, V)
    eta = eta_lower_bound(op, V, resolution)
    d_up = delta_bounds(X, resolution).upper
    threshold = np.inf if L == 0.0 else 2.0 * eta.value / L
    premise = eta.value > 0.0 and d_up < threshold
    if not premise:
        return Theorem12Verdict(PREMISE_FAILS, eta, d_up, L, threshold, False)
    hull = hull_certificate(op, geo.sample(X, resolution), tol)
    margin = eta.value - 0.5 * L * d_up
    if hull.is_membership:
        return Theorem12Verdict(VIOLATION, eta, d_up, L, threshold, True, hull, 0.0, margin)
    sup_inf = min_norm_point(hull.images).norm
    ok = sup_inf > 0.0 and sup_inf >= margin - 1e-9
    verdict = PREMISE_VERIFIED if ok else VIOLATION
    return Theorem12Verdict(verdict, eta, d_up, L, threshold, True, hull, sup_inf, margin)


@dataclass(frozen=True, eq=False)
class NearZeroCertificate:
    body: object
    delta_upper: float
    delta_witness: object
    L: float
    L_provenance: str
    membership: object
    claimed_bound: float
    validation_grid_min: float
    validation_slack: float
    status: str = "ok"
    watermark: str = ""


def certify_near_zero(op: OperatorHandle, X, resolution: int = 16, tol: float | None = None,
                      L: float | None = None) -> NearZeroCertificate:
    """Certify ``inf_X |Phi| <= L delta_up / 2 + residual``.

    Requires a membership certificate on X; a sampled separation means no
    certificate can be issued and raises :class:`NoCertificate`.
    """
    tol = current().hull if tol is None else tol
    L, provenance = _known_L(op, L)
    grid = geo.sample(X, resolution)
    hull = hull_certificate(op, grid, tol)
    if not hull.is_membership:
        raise NoCertificate("sampled images are separated from the origin", payload=hull)
    bounds = delta_bounds(X, resolution)
    claimed = 0.5 * L * bounds.upper + hull.residual
    norms = np.linalg.norm(np.atleast_2d(op.eval(grid.points)), axis=1)
    grid_min = float(norms.min())
    M = estimate_map_lipschitz(op, X, grid)
    slack = M.value * grid.covering_radius
    # the true infimum is at least grid_min - slack and at most the claim
    status = "ok" if grid_min - slack <= claimed + 1e-9 else "SHARPNESS-ANOMALY"
    mark = "conditional on L" if provenance == "user-asserted" else ""
    return NearZeroCertificate(X, bounds.upper, bounds.upper_witness, L, provenance, hull,
                               claimed, grid_min, slack, status, mark)


# --------------------------------------------------------------------------- search


@dataclass(frozen=True, eq=False)
class SearchResult:
    status: str  # "found" or "empty"
    best_body: object
    delta_upper: float | None
    residual: float | None
    trace: list
    evaluations: int
    assumptions: tuple = ("Phi(V) closed: assumed, not verified",)


def _segment_member(op, p, q, samples, tol):
    T = np.linspace(0.0, 1.0, samples)
    pts = p[None, :] + T[:, None] * (q - p)[None, :]
    res = min_norm_point(op.eval(pts), zero_tol=tol)
    return res.norm <= tol, res.norm


def _newton_zero(op, x, V, steps=30):
    for _ in range(steps):
        fx = op.eval(x)
        if np.linalg.norm(fx) == 0.0:
            break
        dx, *_ = np.linalg.lstsq(op.jacobian(x), fx, rcond=None)
        x_new = x - dx
        if not geo.contains(V, x_new, 1e-12):
            return None
        if np.linalg.norm(dx) <= 1e-15 * max(1.0, np.linalg.norm(x)):
            x = x_new
            break
        x = x_new
    return x


def _grid_for_budget(V, budget):
    res = 1
    grid = geo.sample(V, res)
    while len(grid) < max(8, budget // 4) and res < 512:
        res += 1 if res < 8 else res // 4
        nxt = geo.sample(V, res)
        if len(nxt) > 4 * budget:
            break
        grid = nxt
    return grid


def search_small_delta(op: OperatorHandle, V, budget: int, tol: float | None = None,
                       samples: int = 129, newton_starts: int = 4) -> SearchResult:
    """Heuristic search for convex X in V with small delta and 0 in the sampled hull.

    Candidates are singletons (grid points with |Phi| < tol, plus Newton
    refinements of the smallest ones) and segments between grid points with
    opposed images, shortest first. Each accepted segment is shrunk from both
    ends by bisection while membership persists (membership is monotone under
    inclusion). ``budget`` caps the number of membership and Newton
    evaluations. Deterministic: candidates are ordered by (length, indices).
    """
    if budget < 1:
        raise ValueError("budget must be positive")
    tol = current().hull if tol is None else tol
    grid = _grid_for_budget(V, budget)
    P = np.asarray(grid.points, dtype=float)
    F = np.atleast_2d(op.eval(P))
    norms = np.linalg.norm(F, axis=1)
    trace = []
    used = 0

    for i in np.flatnonzero(norms <= tol):
        body = geo.Segment(P[i], P[i])
        trace.append((body, 0.0, float(norms[i])))
    order = np.argsort(norms, kind="stable")[:newton_starts]
    for i in order:
        if used >= budget or norms[i] <= tol:
            continue
        used += 1
        z = _newton_zero(op, P[i].copy(), V)
        if z is not None:
            r = float(np.linalg.norm(op.eval(z)))
            if r <= tol:
                trace.append((geo.Segment(z, z), 0.0, r))

    if not trace:
        U = F / np.where(norms > 0.0, norms, 1.0)[:, None]
        I, J = np.nonzero(np.triu(U @ U.T < 0.0, 1))
        length = np.linalg.norm(P[I] - P[J], axis=1)
        cand = np.lexsort((J, I, length))
        for k in cand:
            if used >= budget:
                break
            p, q = P[I[k]], P[J[k]]
            used += 1
            ok, _ = _segment_member(op, p, q, samples, tol)
            if not ok:
                continue
            p, q, used = _shrink(op, p, q, samples, tol, used, budget)
            _, r = _segment_member(op, p, q, samples, tol)
            body = geo.Segment(p, q)
            trace.append((body, delta_segment_exact(body), r))

    if not trace:
        return SearchResult("empty", None, None, None, [], used)
    best = min(trace, key=lambda t: (t[1], t[2], tuple(np.concatenate([t[0].a, t[0].b]))))
    return SearchResult("found", best[0], best[1], best[2], trace, used)


def _shrink(op, p, q, samples, tol, used, budget, steps=30):
    for _ in range(2):
        lo, hi = 0.0, 1.0  # membership holds at lo
        for _ in range(steps):
            if used >= budget:
                break
            mid = 0.5 * (lo + hi)
            used += 1
            if _segment_member(op, p + mid * (q - p), q, samples, tol)[0]:
                lo = mid
            else:
                hi = mid
        p, q = q, p + lo * (q - p)
    return p, q, used


# --------------------------------------------------------------------------- example table


@dataclass(frozen=True)
class Example11Row:
    n: int
    alpha: float
    beta: float
    phi_alpha: tuple
    phi_beta: tuple
    paper_bound: float
    delta_exact: float
    membership_residual: float


@dataclass(frozen=True)
class Example11Table:
    rows: list
    max_norm_deviation: float
    zero_in_image: bool
    notes: tuple = field(default_factory=tuple)


def example11_table(n_max: int, samples_per_row: int = 257) -> Example11Table:
    """Rows for ``X_n = [sqrt(n), sqrt(n + 3/4)] x {0}`` under the example11 operator.

    ``paper_bound`` is ``beta^2 - alpha^2`` taken from the defining squares
    (constant 3/4); ``delta_exact`` is the segment value ``(beta - alpha)^2/4``
    with ``beta - alpha = (3/4)/(alpha + beta)``. The last fields record that
    |Phi| = 1 on every sample, so the origin is never an image.
    """
    if n_max < 1:
        raise ValueError("n_max must be positive")
    op = make_catalog_operator("example11")
    rows, dev, low = [], 0.0, np.inf
    for n in range(1, n_max + 1):
        a2, b2 = float(n), n + 0.75
        a, b = sqrt(a2), sqrt(b2)
        # h depends on x only through x^2, so evaluate at the exact squares
        pa = _example11_at_square(a2)
        pb = _example11_at_square(b2)
        cert = hull_certificate_from_images(np.array([[a, 0.0], [b, 0.0]]), np.vstack([pa, pb]),
                                            current().hull)
        gap = 0.75 / (a + b)
        xs = np.linspace(a, b, samples_per_row)
        imgs = op.eval(np.column_stack([xs, np.zeros_like(xs)]))
        nrm = np.linalg.norm(imgs, axis=1)
        dev = max(dev, float(np.abs(nrm - 1.0).max()))
        low = min(low, float(nrm.min()))
        rows.append(Example11Row(n, a, b, tuple(map(float, pa)), tuple(map(float, pb)), b2 - a2, gap * gap / 4.0,
                                 float(cert.residual)))
    notes = ("paper_bound is 3/4 for every n while delta_exact tends to 0",)
    return Example11Table(rows, dev, low <= current().hull, notes)


def _example11_at_square(u):
    s = float(sinpi(2.0 * u))
    return np.array([float(sinpi(s)), float(cospi(s))])
