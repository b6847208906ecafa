from math import comb, sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_body
from oracles import random_rotation
from zerocert import geometry as geo
from zerocert.errors import DimensionMismatch, UnsupportedVariant


def test_diameter_examples():
    assert geo.diameter(geo.Segment([0, 0], [1, 0])) == 1.0
    assert geo.diameter(geo.Ball([3, 4], 1)) == 2.0
    assert geo.diameter(geo.Polytope([[0, 0], [1, 0], [0, 1], [1, 1]])) == pytest.approx(sqrt(2), abs=1e-15)


def test_segment_grid_example():
    g = geo.sample(geo.Segment([0, 0], [1, 0]), 4)
    assert np.allclose(g.points[:, 0], [0, 0.25, 0.5, 0.75, 1.0])
    assert g.covering_radius == 0.125


def test_singleton_grid():
    g = geo.sample(geo.Polytope([[2, 2]]), 7)
    assert len(g) == 1 and g.covering_radius == 0.0


@pytest.mark.parametrize("r", [1, 2, 3, 5, 8])
def test_triangle_lattice_count(r):
    g = geo.sample(geo.Polytope([[0, 0], [1, 0], [0, 1]]), r)
    assert len(g) == (r + 1) * (r + 2) // 2


def test_square_grid_count():
    # two triangles sharing a diagonal: 2 * C(r+2, 2) minus the r+1 shared points
    r = 6
    g = geo.sample(geo.Polytope([[0, 0], [1, 0], [1, 1], [0, 1]]), r)
    assert len(g) == 2 * comb(r + 2, 2) - (r + 1)


def test_extreme_points_examples():
    E = geo.extreme_points(geo.Segment([0, 0], [1, 0]))
    assert np.array_equal(E, [[0, 0], [1, 0]])
    E = geo.extreme_points(geo.Polytope([[0, 0], [2, 0], [1, 0]]))
    assert sorted(map(tuple, E)) == [(0, 0), (2, 0)]
    assert len(geo.extreme_points(geo.Polytope([[0, 0], [1, 0], [0, 1]]))) == 3
    with pytest.raises(UnsupportedVariant):
        geo.extreme_points(geo.Ball([0, 0], 1))


def test_contains_examples():
    assert geo.contains(geo.Ball([0, 0], 1), [0, 1], 0.0)
    assert not geo.contains(geo.Segment([0, 0], [1, 0]), [0.5, 0.1], 1e-9)
    assert geo.contains(geo.Polytope([[0, 0], [1, 0], [1, 1], [0, 1]]), [0.5, 0.5], 0.0)


def test_dimension_errors():
    with pytest.raises(DimensionMismatch):
        geo.Segment([0, 0], [1, 0, 0])
    with pytest.raises(DimensionMismatch):
        geo.Segment([0], [1])


def test_diameter_invariance():
    rng = np.random.default_rng(3)
    for _ in range(40):
        body = random_body(rng)
        Q = random_rotation(body.dim, rng)
        t = rng.uniform(-5, 5, body.dim)
        d0 = geo.diameter(body)
        assert abs(geo.diameter(body.translated(t)) - d0) <= 1e-12 * max(1, d0) * 10
        assert abs(geo.diameter(body.transformed(Q)) - d0) <= 1e-12 * max(1, d0) * 10


def test_grid_points_inside_bodies():
    rng = np.random.default_rng(5)
    bodies = [random_body(rng) for _ in range(25)]
    bodies += [geo.Ball(rng.uniform(-1, 1, 2), 1.3), geo.Ball(rng.uniform(-1, 1, 3), 0.7)]
    for body in bodies:
        g = geo.sample(body, 5)
        for p in g.points:
            assert geo.contains(body, p, 1e-12)


def _nearest(grid, pts):
    D = np.linalg.norm(pts[:, None, :] - grid.points[None, :, :], axis=2)
    return D.min(axis=1)


@given(st.integers(1, 40), st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_segment_covering_radius(res, seed):
    rng = np.random.default_rng(seed)
    body = random_body(rng, kind="segment")
    g = geo.sample(body, res)
    t = rng.random(1000)
    pts = body.a + t[:, None] * (body.b - body.a)
    assert _nearest(g, pts).max() <= g.covering_radius * (1 + 1e-12) + 1e-15


@pytest.mark.parametrize("seed", range(6))
def test_polytope_and_ball_covering_radius(seed):
    rng = np.random.default_rng(100 + seed)
    for body in (random_body(rng, kind="polytope"), geo.Ball(rng.uniform(-1, 1, 2), 1.0),
                 geo.Ball(rng.uniform(-1, 1, 3), 1.0)):
        g = geo.sample(body, 4)
        pts = geo.uniform_points(body, 1000, rng)
        assert _nearest(g, pts).max() <= g.covering_radius + 1e-12


def test_extreme_points_property():
    rng = np.random.default_rng(11)
    for _ in range(20):
        body = random_body(rng, kind="polytope")
        E = geo.extreme_points(body)
        V = body.vertices()
        assert all(any(np.array_equal(e, v) for v in V) for e in E)
        hull = geo.Polytope(E)
        assert all(geo.contains(hull, v, 1e-9) for v in V)


def test_bodies_are_immutable():
    s = geo.Segment([0, 0], [1, 0])
    with pytest.raises(ValueError):
        s.a[0] = 5.0
