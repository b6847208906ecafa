"""Operators Phi: R^d -> R^d with Jacobians, a small catalog, and Lipschitz tools.

Catalog entries (``make_catalog_operator(name, params)``):

``example11``
    ``Phi(x, y) = (sin h(x), cos h(x))`` with ``h(x) = pi sin(2 pi x^2)``.
    The derivative is not Lipschitz (``|h'(x)| = 4 pi^2 |x cos(2 pi x^2)|``
    grows without bound), so no constant is attached.
``prop11_circle``
    ``Phi(x) = sin(theta) u + cos(theta) v`` with
    ``theta = pi <w, x - x1> / <w, x2 - x1>``. Writing ``a = pi w / D`` and
    ``D = <w, x2 - x1>``, the Jacobian is ``(cos(theta) u - sin(theta) v) a^T``,
    a rank-one matrix of norm ``|a|`` (u, v orthonormal). For two points,
    ``J(x) - J(y) = [(cos tx - cos ty) u - (sin tx - sin ty) v] a^T`` has norm
    ``2 |sin((tx - ty)/2)| |a| <= |tx - ty| |a| <= |a|^2 |x - y|``, hence
    ``L = |a|^2 = pi^2 |w|^2 / D^2``.
``affine``, ``identity``, ``translation``
    ``Phi(x) = A x + b``; constant Jacobian, ``L = 0``.
``square_map``
    ``Phi(x, y) = (x^2 - y, y^2 - x)`` with ``J = [[2x, -1], [-1, 2y]]``;
    ``J(v) - J(w) = diag(2 dx, 2 dy)`` so ``L = 2``. Zeros at (0, 0) and (1, 1).

Trigonometric closed forms use exact argument reduction (``sinpi``), so the
catalog reproduces values such as ``h(sqrt(n)) = 0`` without drift.
"""

from dataclasses import dataclass, field
from math import pi

import numpy as np

from . import geometry as geo
from . import kernels
from .config import current
from .errors import DimensionMismatch, DomainError, NonConvergence, UndefinedQuotient


def sinpi(s: np.ndarray) -> np.ndarray:
    """``sin(pi s)`` with exact reduction of ``s`` modulo 2."""
    s = np.asarray(s, dtype=float)
    r = s - 2.0 * np.round(s / 2.0)  # r in [-1, 1]
    r = np.where(r > 0.5, 1.0 - r, r)
    r = np.where(r < -0.5, -1.0 - r, r)
    return np.sin(pi * r)


def cospi(s: np.ndarray) -> np.ndarray:
    """``cos(pi s)`` as ``sinpi(s + 1/2)``, exact at integers and half-integers."""
    return sinpi(np.asarray(s, dtype=float) + 0.5)


@dataclass(frozen=True, eq=False)
class OperatorHandle:
    """An evaluable map with Jacobian access.

    ``domain`` is a body or ``None`` for all of R^d. ``known_grad_lipschitz``
    is the Lipschitz constant L of the Jacobian in operator norm, when known.
    """

    name: str
    params: dict
    dim: int
    _f: object = field(repr=False)
    _jac: object = field(repr=False, default=None)
    domain: object = None
    known_grad_lipschitz: float | None = None
    jacobian_mode: str = "analytic"
    fd_step: float = current().fd_step
    metadata: dict = field(default_factory=dict)

    def _check(self, X):
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.dim:
            raise DimensionMismatch(f"{self.name} acts on R^{self.dim}, got dimension {X.shape[1]}")
        if self.domain is not None:
            for p in X:
                if not geo.contains(self.domain, p, current().containment):
                    raise DomainError(f"point {p.tolist()} is outside the domain of {self.name}")
        return X, single

    def eval(self, x) -> np.ndarray:
        """``Phi(x)`` for one point (shape ``(d,)``) or a stack (shape ``(n, d)``)."""
        X, single = self._check(x)
        out = self._f(X)
        return out[0] if single else out

    def jacobian(self, x) -> np.ndarray:
        """Jacobian at one point (``(d, d)``) or a stack (``(n, d, d)``)."""
        X, single = self._check(x)
        if self.jacobian_mode == "analytic" and self._jac is not None:
            J = self._jac(X)
        else:
            J = _central_differences(self._f, X, self.fd_step)
        return J[0] if single else J

    def with_finite_differences(self, step=None):
        """Copy of this operator whose Jacobian uses central differences."""
        step = self.fd_step if step is None else float(step)
        return _replace(self, jacobian_mode="finite-difference", fd_step=step)

    def with_domain(self, body: geo.ConvexBody) -> "OperatorHandle":
        return _replace(self, domain=body)


def _replace(op, **kw):
    args = {k: getattr(op, k) for k in op.__dataclass_fields__}
    args.update(kw)
    return OperatorHandle(**args)


def evaluate(op: OperatorHandle, x) -> np.ndarray:
    return op.eval(x)


def jacobian(op: OperatorHandle, x) -> np.ndarray:
    return op.jacobian(x)


def _central_differences(f, X, h):
    n, d = X.shape
    J = np.empty((n, d, d))
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        J[:, :, k] = (f(X + e) - f(X - e)) / (2.0 * h)
    return J


# --------------------------------------------------------------------------- catalog


def _vec(params, key, d=None):
    if key not in params:
        raise KeyError(f"missing operator parameter {key!r}")
    return np.array(geo.as_vector(params[key], d))


def _example11(params):
    def f(X):
        s = sinpi(2.0 * X[:, 0] ** 2)  # h / pi
        return np.column_stack([sinpi(s), cospi(s)])

    def jac(X):
        x = X[:, 0]
        s = sinpi(2.0 * x ** 2)
        dh = 4.0 * pi ** 2 * x * cospi(2.0 * x ** 2)
        J = np.zeros((X.shape[0], 2, 2))
        J[:, 0, 0] = cospi(s) * dh
        J[:, 1, 0] = -sinpi(s) * dh
        return J

    meta = {"derivative": "not Lipschitz", "role": "counterexample without closed range"}
    return dict(dim=2, f=f, jac=jac, L=None, meta=meta)


def _prop11_circle(params):
    x1 = _vec(params, "x1")
    d = x1.size
    x2, w, u, v = (_vec(params, k, d) for k in ("x2", "w", "u", "v"))
    D = float(w @ (x2 - x1))
    if D == 0.0:
        raise ValueError("prop11_circle needs <w, x2 - x1> != 0")
    if abs(u @ v) > 1e-12 or abs(u @ u - 1.0) > 1e-12 or abs(v @ v - 1.0) > 1e-12:
        raise ValueError("prop11_circle needs orthonormal u and v")
    a = w / D  # theta = pi <a, x - x1>

    def theta_over_pi(X):
        return (X - x1) @ a

    def f(X):
        s = theta_over_pi(X)
        return sinpi(s)[:, None] * u + cospi(s)[:, None] * v

    def jac(X):
        s = theta_over_pi(X)
        left = cospi(s)[:, None] * u - sinpi(s)[:, None] * v
        return pi * left[:, :, None] * a[None, None, :]

    L = pi ** 2 * float(w @ w) / D ** 2
    return dict(dim=d, f=f, jac=jac, L=L, meta={"unit_norm": True})


def _affine_parts(A, b):
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float).ravel()
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] != b.size:
        raise DimensionMismatch("affine operator needs a square A and matching b")
    if A.shape[0] < 2:
        raise DimensionMismatch("operators act on R^d with d >= 2")

    def f(X):
        return X @ A.T + b

    def jac(X):
        return np.broadcast_to(A, (X.shape[0],) + A.shape).copy()

    return dict(dim=A.shape[0], f=f, jac=jac, L=0.0, meta={"jacobian": "constant"})


def _affine(params):
    A = np.array(params["A"], dtype=float)
    b = params.get("b", np.zeros(A.shape[0]))
    return _affine_parts(A, b)


def _identity(params):
    d = int(params.get("d", 2))
    return _affine_parts(np.eye(d), np.zeros(d))


def _translation(params):
    c = _vec(params, "c")
    return _affine_parts(np.eye(c.size), c)


def _square_map(params):
    def f(X):
        x, y = X[:, 0], X[:, 1]
        return np.column_stack([x * x - y, y * y - x])

    def jac(X):
        J = np.empty((X.shape[0], 2, 2))
        J[:, 0, 0] = 2.0 * X[:, 0]
        J[:, 0, 1] = -1.0
        J[:, 1, 0] = -1.0
        J[:, 1, 1] = 2.0 * X[:, 1]
        return J

    return dict(dim=2, f=f, jac=jac, L=2.0, meta={"zeros": [[0.0, 0.0], [1.0, 1.0]]})


CATALOG = {
    "example11": _example11,
    "prop11_circle": _prop11_circle,
    "affine": _affine,
    "identity": _identity,
    "translation": _translation,
    "square_map": _square_map,
}


def make_catalog_operator(name: str, params: dict | None = None, domain=None,
                          jacobian_mode: str = "analytic", fd_step: float | None = None) -> OperatorHandle:
    """Build a catalog operator by name (see the module docstring for the formulas)."""
    if name not in CATALOG:
        raise KeyError(f"unknown operator {name!r}; catalog has {sorted(CATALOG)}")
    params = dict(params or {})
    spec = CATALOG[name](params)
    if jacobian_mode not in ("analytic", "finite-difference"):
        raise ValueError(f"unknown jacobian mode {jacobian_mode!r}")
    clean = {k: np.asarray(v, dtype=float).tolist() if not isinstance(v, (int, float)) else v
             for k, v in params.items()}
    return OperatorHandle(
        name=name,
        params=clean,
        dim=spec["dim"],
        _f=spec["f"],
        _jac=spec["jac"],
        domain=domain,
        known_grad_lipschitz=spec["L"],
        jacobian_mode=jacobian_mode,
        fd_step=current().fd_step if fd_step is None else float(fd_step),
        metadata=spec["meta"],
    )


# --------------------------------------------------------------------------- norms


def operator_norm(m, rtol: float | None = None, maxiter: int | None = None) -> float:
    """Spectral norm by power iteration on ``m^T m``.

    The start vector is fixed (seeded), so the result is reproducible.
    """
    M = np.atleast_2d(np.asarray(m, dtype=float))
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    rtol = current().power_rtol if rtol is None else rtol
    maxiter = current().power_maxiter if maxiter is None else maxiter
    if not np.any(M):
        return 0.0
    G = M.T @ M
    x0 = np.random.default_rng(0).standard_normal(G.shape[0])
    lam, it, ok = kernels.power_iteration(G, x0, rtol, maxiter)
    if not ok:
        raise NonConvergence(
            f"power iteration did not reach rtol {rtol:g} in {maxiter} steps",
            {"estimate": float(np.sqrt(max(lam, 0.0))), "iterations": it},
        )
    return float(np.sqrt(max(lam, 0.0)))


def spectral_norms_upper(Js: np.ndarray) -> np.ndarray:
    """Batched spectral norms rounded up by a relative 1e-12 (used in certified moduli)."""
    Js = np.asarray(Js, dtype=float)
    return np.linalg.norm(Js, ord=2, axis=(-2, -1)) * (1.0 + 1e-12)


@dataclass(frozen=True, eq=False)
class LipschitzEstimate:
    value: float
    n_pairs: int
    argmax_pair: tuple
    is_lower_estimate: bool = True


def estimate_grad_lipschitz(op: OperatorHandle, region, n_pairs: int, seed: int = 0) -> LipschitzEstimate:
    """Largest sampled ``|J(x) - J(y)| / |x - y|`` over seeded uniform pairs.

    A sampled maximum can only undershoot the true constant, so the result is
    always a lower estimate.
    """
    if n_pairs < 1:
        raise ValueError("n_pairs must be positive")
    if region.is_singleton():
        raise UndefinedQuotient("a single point admits no difference quotient")
    rng = np.random.default_rng(seed)
    X = geo.uniform_points(region, n_pairs, rng)
    Y = geo.uniform_points(region, n_pairs, rng)
    JX, JY = op.jacobian(X), op.jacobian(Y)
    dist = np.linalg.norm(X - Y, axis=1)
    best, arg = 0.0, (X[0].copy(), Y[0].copy())
    for k in range(n_pairs):
        if dist[k] == 0.0:
            continue
        q = operator_norm(JX[k] - JY[k]) / dist[k]
        if q > best:
            best, arg = q, (X[k].copy(), Y[k].copy())
    return LipschitzEstimate(best, n_pairs, arg)


@dataclass(frozen=True)
class MapModulus:
    """Bound M on the Lipschitz constant of Phi over a region.

    ``certified`` is true when the known Jacobian constant L covered the gaps
    between grid points; otherwise ``value`` is only the grid maximum.
    """

    value: float
    certified: bool
    grid_max: float
    covering_radius: float

    def __float__(self) -> float:
        return self.value


def estimate_map_lipschitz(op: OperatorHandle, region, grid) -> MapModulus:
    """``max_grid |J| + L * covering_radius``.

    Every region point is within the covering radius h of a grid point g, and
    ``|J(x)| <= |J(g)| + L h``; the region is convex, so the sup of |J| bounds
    the Lipschitz constant of Phi on it.
    """
    norms = spectral_norms_upper(op.jacobian(grid.points))
    gmax = float(norms.max())
    L = op.known_grad_lipschitz
    if L is None:
        return MapModulus(gmax, False, gmax, grid.covering_radius)
    return MapModulus(gmax + L * grid.covering_radius, True, gmax, grid.covering_radius)
