"""Convex bodies in R^d (V-representation only), sampling grids and elementary queries.

A body is one of :class:`Segment`, :class:`Polytope` or :class:`Ball`.
Singletons are legal everywhere: a segment with ``a == b`` or a one-vertex
polytope.

Grids carry a *certified* covering radius: every point of the body lies
within ``covering_radius`` of some grid point.

* Segment, resolution r: ``r + 1`` equally spaced points, radius ``|b-a|/(2r)``.
* Polytope, resolution r: the polytope is triangulated from its first extreme
  vertex (a cone over the boundary facets not containing it) inside its affine
  hull, and each k-simplex carries the barycentric lattice of mesh 1/r. A point
  with barycentric coordinates lam rounds to a lattice point whose coordinates
  differ by less than 1/r each, with D of them rounded up; the displacement is
  then at most ``D(k+1-D)/((k+1) r)`` times the longest simplex edge. The
  reported radius is that bound maximized over D (k=1 gives the segment value,
  k=2 gives 2/3 of the longest edge over r).
* Ball in R^2, resolution n: ring j = 0..n has radius ``rho_j = R j/n`` and
  ``N_j = ceil(2 pi j)`` equally spaced points (one point for j = 0), so the
  count is proportional to the circumference. A point between rings j and j+1
  is within ``sqrt((rho - rho_k)^2 + 4 rho rho_k sin^2(pi/(2 N_k)))`` of ring k;
  that expression is convex in rho, so its maximum over the annulus sits at an
  endpoint. The reported radius is the max over annuli of the better ring.
* Ball in R^d, d >= 3: cubic lattice of spacing ``h = R/n`` around the center,
  points within ``R + h sqrt(d)`` kept and radially projected onto the ball.
  Projection onto a convex set is non-expansive, so the radius is
  ``h sqrt(d)/2`` (half the cube diagonal).
"""

from dataclasses import dataclass
from itertools import combinations
from math import ceil, comb, pi, sin, sqrt

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import DimensionMismatch, UnsupportedVariant

MAX_DIM = 16


def as_vector(p, d: int | None = None) -> np.ndarray:
    v = np.array(p, dtype=float).ravel()
    if v.size < 2:
        raise DimensionMismatch(f"vectors need dimension >= 2, got {v.size}")
    if d is not None and v.size != d:
        raise DimensionMismatch(f"expected dimension {d}, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite vector entries")
    v.setflags(write=False)
    return v


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class ConvexBody:
    """Common base; subclasses are immutable value types."""

    kind = None

    @property
    def dim(self):
        raise NotImplementedError

    def vertices(self):
        raise UnsupportedVariant(f"{self.kind} has no vertex list")

    def translated(self, t):
        raise NotImplementedError

    def transformed(self, Q, scale=1.0):
        """Image under ``x -> scale * Q x`` (Q orthogonal for balls)."""
        raise NotImplementedError

    def is_singleton(self) -> bool:
        return diameter(self) == 0.0


@dataclass(frozen=True, eq=False)
class Segment(ConvexBody):
    a: np.ndarray
    b: np.ndarray
    kind = "segment"

    def __post_init__(self):
        a = as_vector(self.a)
        b = as_vector(self.b, a.size)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def dim(self):
        return self.a.size

    def vertices(self):
        return _frozen(np.vstack([self.a, self.b]))

    def point(self, t):
        return self.a + t * (self.b - self.a)

    def translated(self, t):
        return Segment(self.a + t, self.b + t)

    def transformed(self, Q, scale=1.0):
        return Segment(scale * (Q @ self.a), scale * (Q @ self.b))

    def __eq__(self, other):
        return (
            isinstance(other, Segment)
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.b, other.b)
        )

    def __hash__(self):
        return hash((self.kind, self.a.tobytes(), self.b.tobytes()))

    def __repr__(self):
        return f"Segment(a={self.a.tolist()}, b={self.b.tolist()})"


@dataclass(frozen=True, eq=False)
class Polytope(ConvexBody):
    points: np.ndarray
    kind = "polytope"

    def __post_init__(self):
        P = np.atleast_2d(np.array(self.points, dtype=float))
        if P.shape[0] < 1:
            raise ValueError("polytope needs at least one vertex")
        if P.shape[1] < 2:
            raise DimensionMismatch(f"vectors need dimension >= 2, got {P.shape[1]}")
        if not np.all(np.isfinite(P)):
            raise ValueError("non-finite vertex coordinates")
        P.setflags(write=False)
        object.__setattr__(self, "points", P)

    @property
    def dim(self):
        return self.points.shape[1]

    def vertices(self):
        return self.points

    def translated(self, t):
        return Polytope(self.points + np.asarray(t, dtype=float))

    def transformed(self, Q, scale=1.0):
        return Polytope(scale * self.points @ np.asarray(Q).T)

    def __eq__(self, other):
        return isinstance(other, Polytope) and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash((self.kind, self.points.tobytes()))

    def __repr__(self):
        return f"Polytope({self.points.tolist()})"


@dataclass(frozen=True, eq=False)
class Ball(ConvexBody):
    center: np.ndarray
    radius: float
    kind = "ball"

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        r = float(self.radius)
        if not (r >= 0.0 and np.isfinite(r)):
            raise ValueError(f"ball radius must be finite and >= 0, got {self.radius}")
        object.__setattr__(self, "radius", r)

    @property
    def dim(self):
        return self.center.size

    def translated(self, t):
        return Ball(self.center + t, self.radius)

    def transformed(self, Q, scale=1.0):
        return Ball(scale * (Q @ self.center), abs(scale) * self.radius)

    def __eq__(self, other):
        return (
            isinstance(other, Ball)
            and np.array_equal(self.center, other.center)
            and self.radius == other.radius
        )

    def __hash__(self):
        return hash((self.kind, self.center.tobytes(), self.radius))

    def __repr__(self):
        return f"Ball(center={self.center.tolist()}, radius={self.radius!r})"


@dataclass(frozen=True, eq=False)
class SampleGrid:
    body: ConvexBody
    points: np.ndarray
    covering_radius: float
    resolution: int = 0

    def __len__(self):
        return self.points.shape[0]


def diameter_squared(body: ConvexBody) -> float:
    """Squared diameter, computed without a square root round trip."""
    if isinstance(body, Segment):
        u = body.b - body.a
        return float(u @ u)
    if isinstance(body, Ball):
        return 4.0 * body.radius ** 2
    P = body.points
    if P.shape[0] == 1:
        return 0.0
    diff = P[:, None, :] - P[None, :, :]
    return float(np.max(np.einsum("ijk,ijk->ij", diff, diff)))


def diameter(body: ConvexBody) -> float:
    """Largest distance between two points of ``body``."""
    if isinstance(body, Ball):
        return 2.0 * body.radius
    return float(np.sqrt(diameter_squared(body)))


def affine_frame(P, rtol=1e-12):
    """Origin, orthonormal basis rows and intrinsic dimension of aff(P)."""
    P = np.asarray(P, dtype=float)
    origin = P[0]
    D = P - origin
    if P.shape[0] == 1 or not np.any(D):
        return origin, np.zeros((0, P.shape[1])), 0
    _, s, Vt = np.linalg.svd(D, full_matrices=False)
    k = int(np.sum(s > rtol * max(s[0], 1e-300) * max(1, P.shape[0])))
    return origin, Vt[:k], k


def _in_hull_lp(V, p, tol):
    """Smallest sup-norm residual of ``p`` as a convex combination of rows of ``V``."""
    from .optim.lp import LinearProgram, solve_lp

    n, d = V.shape
    # variables: lam (n), s >= 0; minimize s with |V'lam - p| <= s
    c = np.zeros(n + 1)
    c[-1] = 1.0
    A_ub = np.zeros((2 * d, n + 1))
    A_ub[:d, :n] = V.T
    A_ub[:d, -1] = -1.0
    A_ub[d:, :n] = -V.T
    A_ub[d:, -1] = -1.0
    b_ub = np.concatenate([p, -p])
    A_eq = np.zeros((1, n + 1))
    A_eq[0, :n] = 1.0
    sol = solve_lp(LinearProgram(c=c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0]))
    return float(sol.objective), sol.x[:n]


def extreme_points(body: ConvexBody) -> np.ndarray:
    """Vertices of ``body`` that are not convex combinations of the others.

    Exact duplicates are collapsed first (keeping the first copy); the rest
    are tested one by one with an LP membership check against the others.
    """
    if isinstance(body, Ball):
        raise UnsupportedVariant("a ball has infinitely many extreme points")
    if isinstance(body, Segment):
        if np.array_equal(body.a, body.b):
            return _frozen(body.a[None, :])
        return body.vertices()
    P = body.points
    _, idx = np.unique(P, axis=0, return_index=True)
    P = P[np.sort(idx)]
    if P.shape[0] <= 2:
        return _frozen(P)
    scale = max(1.0, float(np.abs(P).max()))
    keep = []
    for i in range(P.shape[0]):
        others = np.delete(P, i, axis=0)
        resid, _ = _in_hull_lp(others, P[i], 0.0)
        if resid > 1e-10 * scale:
            keep.append(i)
    return _frozen(P[keep])


def contains(body: ConvexBody, p, tol: float = 0.0) -> bool:
    """Whether ``p`` lies in ``body`` up to distance ``tol`` (sup-norm residual for polytopes)."""
    p = as_vector(p, body.dim)
    if isinstance(body, Ball):
        return bool(np.linalg.norm(p - body.center) <= body.radius + tol)
    if isinstance(body, Segment):
        return bool(_dist_to_segment(body.a, body.b, p) <= tol)
    P = body.points
    if P.shape[0] == 1:
        return bool(np.linalg.norm(p - P[0]) <= tol)
    resid, _ = _in_hull_lp(P, p, tol)
    return bool(resid <= tol)


def _dist_to_segment(a, b, p):
    ab = b - a
    L2 = float(ab @ ab)
    t = 0.0 if L2 == 0.0 else min(1.0, max(0.0, float((p - a) @ ab) / L2))
    return float(np.linalg.norm(p - (a + t * ab)))


def simplex_lattice(k: int, r: int) -> np.ndarray:
    """All barycentric coordinate vectors with denominator ``r`` on a k-simplex."""
    if k == 0:
        return np.ones((1, 1))
    rows = []
    # stars and bars over k+1 parts summing to r
    for bars in combinations(range(r + k), k):
        prev = -1
        parts = []
        for bpos in bars:
            parts.append(bpos - prev - 1)
            prev = bpos
        parts.append(r + k - 1 - prev)
        rows.append(parts)
    out = np.array(rows, dtype=float) / r
    assert out.shape[0] == comb(r + k, k)
    return out


def lattice_covering_factor(k: int) -> float:
    """Max over D of D(k+1-D)/(k+1): lattice rounding displacement per (edge/r)."""
    if k == 0:
        return 0.0
    return max(D * (k + 1 - D) for D in range(k + 2)) / (k + 1)


def triangulate(body):
    """Fan triangulation of a polytope from its first extreme vertex.

    Returns ``(simplices, k)`` where ``simplices`` is a list of ``(k+1, d)``
    vertex arrays. Zero-volume simplices are dropped.
    """
    E = np.asarray(extreme_points(body))
    origin, basis, k = affine_frame(E)
    if k == 0:
        return [E[:1]], 0
    if k == 1:
        t = (E - origin) @ basis[0]
        return [np.vstack([E[np.argmin(t)], E[np.argmax(t)]])], 1
    Y = (E - origin) @ basis.T
    try:
        hull = ConvexHull(Y, qhull_options="Qt")
    except QhullError:  # pragma: no cover - k is the SVD rank, qhull agrees
        hull = ConvexHull(Y, qhull_options="Qt QJ")
    simplices = []
    ref_vol = max(1e-300, float(np.ptp(Y, axis=0).prod()))
    for facet in hull.simplices:
        if 0 in facet:
            continue
        idx = [0] + [int(i) for i in facet]
        S = Y[idx]
        vol = abs(np.linalg.det(S[1:] - S[0]))
        if vol <= 1e-12 * ref_vol:
            continue
        simplices.append(E[idx])
    return simplices, k


def _dedupe(points, scale):
    key = np.round(points / scale, 9)
    _, idx = np.unique(key, axis=0, return_index=True)
    return points[np.sort(idx)]


def sample(body: ConvexBody, resolution: int) -> SampleGrid:
    """Deterministic grid over ``body`` with a certified covering radius (see module doc)."""
    resolution = int(resolution)
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    if body.dim > MAX_DIM:
        raise DimensionMismatch(f"dimension {body.dim} exceeds supported maximum {MAX_DIM}")
    if isinstance(body, Segment):
        if np.array_equal(body.a, body.b):
            return SampleGrid(body, _frozen(body.a[None, :]), 0.0, resolution)
        t = np.arange(resolution + 1) / resolution
        pts = body.a[None, :] + t[:, None] * (body.b - body.a)[None, :]
        pts[-1] = body.b
        cov = float(np.linalg.norm(body.b - body.a)) / (2 * resolution)
        return SampleGrid(body, _frozen(pts), cov, resolution)
    if isinstance(body, Ball):
        return _sample_ball(body, resolution)
    simplices, k = triangulate(body)
    if k == 0:
        return SampleGrid(body, _frozen(simplices[0][:1]), 0.0, resolution)
    bary = simplex_lattice(k, resolution)
    chunks = []
    longest = 0.0
    for S in simplices:
        chunks.append(bary @ S)
        for i in range(k + 1):
            for j in range(i + 1, k + 1):
                longest = max(longest, float(np.linalg.norm(S[i] - S[j])))
    pts = np.vstack(chunks)
    scale = max(1.0, float(np.abs(pts).max()))
    pts = _dedupe(pts, scale)
    cov = lattice_covering_factor(k) * longest / resolution
    return SampleGrid(body, _frozen(pts), cov, resolution)


def ring_counts(resolution: int) -> list[int]:
    return [1] + [int(ceil(2 * pi * j)) for j in range(1, resolution + 1)]


def ring_covering_radius(radius: float, resolution: int) -> float:
    n = resolution
    counts = ring_counts(n)
    rho = [radius * j / n for j in range(n + 1)]
    worst = 0.0
    for j in range(n):
        lo, hi = rho[j], rho[j + 1]
        s_out = sin(pi / (2 * counts[j + 1])) ** 2
        outer = max((hi - r) ** 2 + 4 * r * hi * s_out for r in (lo, hi))
        if j == 0:
            inner = hi * hi
        else:
            s_in = sin(pi / (2 * counts[j])) ** 2
            inner = max((r - lo) ** 2 + 4 * r * lo * s_in for r in (lo, hi))
        worst = max(worst, min(outer, inner))
    return sqrt(worst)


def _sample_ball(body, n):
    c, R, d = body.center, body.radius, body.dim
    if R == 0.0:
        return SampleGrid(body, _frozen(c[None, :]), 0.0, n)
    if d == 2:
        pts = [c.copy()]
        for j, N in enumerate(ring_counts(n)[1:], start=1):
            rho = R * j / n
            th = 2 * pi * np.arange(N) / N
            pts.extend(c + rho * np.column_stack([np.cos(th), np.sin(th)]))
        pts = np.vstack(pts)
        return SampleGrid(body, _frozen(pts), ring_covering_radius(R, n), n)
    h = R / n
    reach = R + h * sqrt(d)
    m = int(ceil(reach / h))
    axis = np.arange(-m, m + 1) * h
    mesh = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    nrm = np.linalg.norm(mesh, axis=1)
    mesh = mesh[nrm <= reach]
    nrm = nrm[nrm <= reach]
    out = nrm > R
    mesh[out] *= (R / nrm[out])[:, None]
    pts = _dedupe(c + mesh, max(1.0, float(np.abs(c).max()) + R))
    return SampleGrid(body, _frozen(pts), h * sqrt(d) / 2, n)


def bounding_box(body):
    if isinstance(body, Ball):
        return body.center - body.radius, body.center + body.radius
    V = body.vertices()
    return V.min(axis=0), V.max(axis=0)


def uniform_points(body: ConvexBody, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` points uniform over ``body`` by rejection from its bounding box.

    Lower-dimensional polytopes and segments are handled in their affine hull,
    where the box has positive volume.
    """
    if isinstance(body, Segment):
        t = rng.random(n)
        return body.a[None, :] + t[:, None] * (body.b - body.a)[None, :]
    if isinstance(body, Ball):
        lo, hi = bounding_box(body)
        out = []
        got = 0
        while got < n:
            cand = lo + (hi - lo) * rng.random((2 * n + 8, body.dim))
            ok = np.linalg.norm(cand - body.center, axis=1) <= body.radius
            out.append(cand[ok])
            got += int(ok.sum())
        return np.vstack(out)[:n]
    E = np.asarray(extreme_points(body))
    origin, basis, k = affine_frame(E)
    if k == 0:
        return np.repeat(E[:1], n, axis=0)
    Y = (E - origin) @ basis.T
    if k == 1:
        t = rng.random(n)
        lo, hi = Y.min(), Y.max()
        return origin + (lo + (hi - lo) * t)[:, None] * basis[0][None, :]
    hull = ConvexHull(Y)
    A, b = hull.equations[:, :-1], hull.equations[:, -1]
    lo, hi = Y.min(axis=0), Y.max(axis=0)
    out = []
    got = 0
    while got < n:
        cand = lo + (hi - lo) * rng.random((2 * n + 8, k))
        ok = np.all(cand @ A.T + b <= 1e-12, axis=1)
        out.append(cand[ok])
        got += int(ok.sum())
    Z = np.vstack(out)[:n]
    return origin + Z @ basis
