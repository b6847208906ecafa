"""Hull certificates and sampled minimax values for ``f(x, y) = <Phi(x), y>``.

Y is the closed unit ball and is never discretized:

* ``sup_{|y| <= 1} <s, y> = |s|`` (Cauchy-Schwarz, attained at ``y = s/|s|``),
  so ``inf_x sup_y f = min_i |Phi(x_i)|`` on a grid.
* ``sup_{|y| <= 1} min_i <s_i, y> = dist(0, conv S)``: for any unit y the
  minimum over S equals the minimum over conv S, which is at most
  ``<p*, y> <= |p*|``; conversely ``y = p*/|p*|`` achieves ``|p*|`` because
  p* is the nearest hull point (``<s - p*, p*> >= 0``). If 0 is in the hull,
  the value is 0 (take y = 0).

A sampled hull is a subset of the true one, so a membership certificate is
sound for the closed hull of Phi(X), while a separation only speaks about the
samples.
"""

from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .config import current
from .errors import InternalInconsistency, NotInterpolable
from .operators import OperatorHandle, estimate_map_lipschitz
from .optim.minnorm import min_norm_point

MEMBERSHIP = "membership"
SAMPLE_SEPARATION = "sample-separation"
SEPARATION_SCOPE = "sample hull only"
MEMBERSHIP_SCOPE = "closed hull of Phi(X), up to the residual"


@dataclass(frozen=True, eq=False)
class HullCertificate:
    kind: str
    sample_points: np.ndarray
    images: np.ndarray
    tol: float
    weights: np.ndarray | None = None
    residual: float | None = None
    direction: np.ndarray | None = None
    margin: float | None = None
    scope: str = ""

    @property
    def is_membership(self) -> bool:
        return self.kind == MEMBERSHIP

    def validate(self, atol: float = 1e-10) -> bool:
        """Recheck the certificate from its stored data; raises on failure."""
        if self.is_membership:
            lam = self.weights
            if np.any(lam < 0.0) or abs(lam.sum() - 1.0) > 1e-10:
                raise InternalInconsistency("membership weights are not a convex combination")
            r = float(np.linalg.norm(self.images.T @ lam))
            if abs(r - self.residual) > atol or r > self.tol + atol:
                raise InternalInconsistency(f"membership residual {r:.3e} does not reproduce")
        else:
            worst = float(np.min(self.images @ self.direction))
            if worst < self.margin - atol or self.margin <= 0.0:
                raise InternalInconsistency(
                    f"separation margin {self.margin:.3e} fails on a sample ({worst:.3e})"
                )
        return True


def _separation(images, tol):
    """Min-norm point tight enough that ``gamma = |p| - tol`` holds on every sample."""
    gap_tol = float(np.sqrt(current().fw_gap))
    for _ in range(6):
        res = min_norm_point(images, tol=gap_tol, zero_tol=tol)
        if res.norm <= tol:
            return res
        y = res.point / res.norm
        if float(np.min(images @ y)) >= res.norm - tol:
            return res
        gap_tol = min(gap_tol, np.sqrt(tol * res.norm)) / 4.0
    return res


def hull_certificate(op: OperatorHandle, grid, tol: float | None = None) -> HullCertificate:
    """Decide ``0 in conv{Phi(x_i)}`` up to ``tol`` on the grid images."""
    tol = current().hull if tol is None else float(tol)
    X = np.asarray(grid.points, dtype=float)
    S = np.atleast_2d(op.eval(X))
    return hull_certificate_from_images(X, S, tol)


def hull_certificate_from_images(X, S, tol):
    res = _separation(S, tol)
    if res.norm <= tol:
        lam = res.weights
        cert = HullCertificate(MEMBERSHIP, X, S, tol, weights=lam,
                               residual=float(np.linalg.norm(S.T @ lam)), scope=MEMBERSHIP_SCOPE)
    else:
        y = res.point / res.norm
        cert = HullCertificate(SAMPLE_SEPARATION, X, S, tol, direction=y,
                               margin=res.norm - tol, scope=SEPARATION_SCOPE)
    cert.validate()
    return cert


@dataclass(frozen=True)
class MinimaxReport:
    inf_sup: float
    sup_inf: float
    gap: float
    covering_radius: float
    discretization_slack: float
    slack_certified: bool
    rhs_bound: float | None = None
    notes: tuple = field(default_factory=tuple)


def sampled_minimax(images: np.ndarray) -> tuple[float, float]:
    """``(inf_sup, sup_inf)`` for a finite image set, via the reductions above."""
    S = np.atleast_2d(np.asarray(images, dtype=float))
    inf_sup = float(np.min(np.linalg.norm(S, axis=1)))
    sup_inf = min_norm_point(S).norm
    return inf_sup, sup_inf


def minimax_values(op: OperatorHandle, grid) -> MinimaxReport:
    """Sampled ``inf_X sup_Y f`` and ``sup_Y inf_X f`` with discretization slack ``M h``."""
    inf_sup, sup_inf = sampled_minimax(op.eval(grid.points))
    M = estimate_map_lipschitz(op, grid.body, grid)
    slack = M.value * grid.covering_radius
    notes = () if M.certified else ("heuristic slack",)
    return MinimaxReport(inf_sup, sup_inf, inf_sup - sup_inf, grid.covering_radius,
                         slack, M.certified, None, notes)


@dataclass(frozen=True)
class GapCheck:
    holds: bool
    lhs: float
    rhs: float
    slack: float
    report: MinimaxReport


def gap_inequality_check(op: OperatorHandle, body, psi, grid, L: float) -> GapCheck:
    """Check ``inf sup f - sup inf f <= (L/2) osc(|x|^2 + psi)`` on the grid.

    ``psi`` is evaluated through its max-of-affine extension, which agrees
    with the data at interpolable data points. Sampling moves each side by a
    bounded amount: the sampled gap exceeds the true one by at most ``M h``
    (the grid minimum of |Phi| overshoots by at most that, and the sampled hull
    is smaller), and the sampled oscillation undershoots by at most
    ``2 K h`` with K the Lipschitz constant of ``|x|^2 + psi`` on the body.
    The slack is ``M h + L K h``.
    """
    if not psi.is_interpolable(current().interpolation):
        raise NotInterpolable(f"psi violates convex interpolation by {psi.max_violation():.3e}")
    X = np.asarray(grid.points, dtype=float)
    report = minimax_values(op, grid)
    phi = np.array([x @ x + psi.extension(x)[0] for x in X])
    rhs = 0.5 * L * float(phi.max() - phi.min())
    radius = _max_norm(body)
    K = 2.0 * radius + float(np.max(np.linalg.norm(psi.subgradients, axis=1), initial=0.0))
    slack = report.discretization_slack + L * K * grid.covering_radius
    lhs = report.gap
    report = MinimaxReport(report.inf_sup, report.sup_inf, report.gap, report.covering_radius,
                           slack, report.slack_certified, rhs, report.notes)
    return GapCheck(lhs <= rhs + slack + 1e-9, lhs, rhs, slack, report)


def _max_norm(body):
    if isinstance(body, geo.Ball):
        return float(np.linalg.norm(body.center)) + body.radius
    return float(np.max(np.linalg.norm(body.vertices(), axis=1)))


@dataclass(frozen=True)
class ConvexityCheck:
    violations: int
    worst: float
    trials: int


def convexity_mechanism_check(op: OperatorHandle, body, L: float, n_trials: int,
                              seed: int = 0) -> ConvexityCheck:
    """Test that ``x -> (L/2)|x|^2 + <Phi(x), y>`` is convex for random unit y.

    Each trial draws v, w in the body and a unit y, and checks gradient
    monotonicity ``L|v-w|^2 + <(J(v)-J(w))^T y, v-w> >= -1e-9`` and midpoint
    convexity at (v + w)/2. ``worst`` is the smallest residual seen.
    """
    rng = np.random.default_rng(seed)
    V = geo.uniform_points(body, n_trials, rng)
    W = geo.uniform_points(body, n_trials, rng)
    Y = rng.standard_normal((n_trials, op.dim))
    Y /= np.linalg.norm(Y, axis=1, keepdims=True)
    D = V - W
    JV, JW = op.jacobian(V), op.jacobian(W)
    mono = L * np.einsum("ij,ij->i", D, D) + np.einsum("ij,ijk,ik->i", Y, JV - JW, D)

    def g(P):
        return 0.5 * L * np.einsum("ij,ij->i", P, P) + np.einsum("ij,ij->i", op.eval(P), Y)

    mid = 0.5 * (g(V) + g(W)) - g(0.5 * (V + W))
    bad = (mono < -1e-9) | (mid < -1e-9)
    worst = float(min(mono.min(), mid.min()))
    return ConvexityCheck(int(bad.sum()), worst, n_trials)
