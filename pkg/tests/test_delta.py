import time

import numpy as np
import pytest

from conftest import random_body
from oracles import EQUILATERAL, UNIT_SQUARE, delta_grid_lp, random_rotation
from zerocert import geometry as geo
from zerocert.delta import (
    PsiData,
    analytic_floor,
    delta_bounds,
    delta_lower_lp,
    delta_segment_exact,
    delta_upper_extension,
    delta_upper_recenter,
)
from zerocert.errors import NotInterpolable

UNIT_SEG = geo.Segment([0, 0], [1, 0])


def test_segment_exact_examples():
    assert delta_segment_exact(UNIT_SEG) == 0.25
    assert delta_segment_exact(geo.Segment([2, 2], [2, 2])) == 0.0
    assert delta_segment_exact(geo.Segment([3, 0], [4, 0])) == 0.25


def test_segment_exact_scaling_is_exact():
    rng = np.random.default_rng(0)
    for _ in range(20):
        s = random_body(rng, kind="segment")
        lam = float(rng.choice([0.5, 2.0, 4.0, 0.25]))  # powers of two keep the arithmetic exact
        assert delta_segment_exact(s.transformed(np.eye(s.dim), lam)) == lam ** 2 * delta_segment_exact(s)


def test_midpoint_convexity_oracle():
    # any convex psi on [0,1]: psi(1/2) <= (psi(0)+psi(1))/2, so for f = c t^2 + psi
    # osc f >= max(|f(0)-f(1/2)|, |f(1)-f(1/2)|) >= c/4; psi(t) = -c t attains it
    c = 1.0
    t = np.linspace(0, 1, 10001)
    f = c * t ** 2 - c * t
    assert f.max() - f.min() == pytest.approx(c / 4, abs=1e-12)


def test_lp_singleton_grid():
    body = geo.Polytope([[1.0, 2.0]])
    val, W = delta_lower_lp(body, geo.sample(body, 5))
    assert val == 0.0 and W.values.tolist() == [0.0]


def test_lp_unit_segment_resolution_64():
    t0 = time.perf_counter()
    val, W = delta_lower_lp(UNIT_SEG, geo.sample(UNIT_SEG, 64))
    assert time.perf_counter() - t0 < 2.0
    assert 0.24 <= val <= 0.25
    assert W.is_interpolable(1e-8)


def test_lp_unit_segment_resolution_128():
    val, _ = delta_lower_lp(UNIT_SEG, geo.sample(UNIT_SEG, 128))
    assert 0.249 <= val <= 0.25


@pytest.mark.parametrize("body", [UNIT_SEG, geo.Polytope(EQUILATERAL), geo.Polytope(UNIT_SQUARE),
                                  geo.Polytope([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])],
                         ids=["segment", "triangle", "square", "tetrahedron"])
def test_lp_matches_full_pair_oracle(body):
    res = 8 if body.dim == 2 else 3
    g = geo.sample(body, res)
    val, W = delta_lower_lp(body, g)
    ref = delta_grid_lp(g.points)
    assert val <= ref + 1e-12
    assert val == pytest.approx(ref, abs=1e-9)
    assert W.is_interpolable(1e-8)


@pytest.mark.parametrize("seed", range(12))
def test_lp_matches_oracle_random(seed):
    rng = np.random.default_rng(300 + seed)
    body = random_body(rng, kind="polytope")
    g = geo.sample(body, 3)
    val, _ = delta_lower_lp(body, g)
    assert val == pytest.approx(delta_grid_lp(g.points), abs=1e-9)


def test_recenter_examples():
    up, c = delta_upper_recenter(UNIT_SEG)
    assert up == pytest.approx(0.25) and np.allclose(c, [0.5, 0])
    up, c = delta_upper_recenter(geo.Ball([3, -1], 0.7))
    assert up == pytest.approx(0.49) and np.allclose(c, [3, -1])
    up, _ = delta_upper_recenter(geo.Polytope(UNIT_SQUARE))
    assert up == pytest.approx(0.5, abs=1e-15)


def test_extension_examples():
    g = geo.sample(UNIT_SEG, 64)
    _, W = delta_lower_lp(UNIT_SEG, g)
    up, slack = delta_upper_extension(UNIT_SEG, W, 1e-9)
    assert 0.25 - 1e-9 <= up <= 0.26
    up, _ = delta_upper_extension(UNIT_SEG, PsiData.zero(g.points), 1e-10)
    assert up == pytest.approx(1.0, abs=1e-8)
    single = geo.Polytope([[1.0, 1.0]])
    assert delta_upper_extension(single, PsiData.zero([[1.0, 1.0]]))[0] == 0.0


def test_extension_rejects_non_interpolable():
    bad = PsiData([[0, 0], [1, 0]], [0.0, 5.0], [[0, 0], [0, 0]])
    bad2 = PsiData(bad.points, [0.0, 0.0], [[3.0, 0.0], [0.0, 0.0]])
    with pytest.raises(NotInterpolable):
        delta_upper_extension(UNIT_SEG, bad2)


def test_bounds_examples():
    b = delta_bounds(UNIT_SEG, 32)
    assert b.lower == b.upper == 0.25
    b = delta_bounds(geo.Polytope(UNIT_SQUARE), 12)
    assert abs(b.lower - 0.5) <= 1e-6 and abs(b.upper - 0.5) <= 1e-6
    b = delta_bounds(geo.Polytope(EQUILATERAL), 16)
    assert 0.25 <= b.lower <= b.upper <= 1 / 3 + 1e-9
    assert b.slack["lp"] >= 0.24
    b = delta_bounds(geo.Polytope([[1.0, 1.0]]), 4)
    assert (b.lower, b.upper) == (0.0, 0.0)


@pytest.mark.parametrize("r", [0.3, 1.0, 2.5])
@pytest.mark.parametrize("d", [2, 3])
def test_ball_pinched(r, d):
    b = delta_bounds(geo.Ball(np.linspace(-1, 1, d), r), 4)
    assert b.lower == pytest.approx(r * r, rel=1e-12)
    assert b.upper == pytest.approx(r * r, rel=1e-12)


def _nested_pairs(body):
    yield geo.sample(body, 2), geo.sample(body, 4)
    yield geo.sample(body, 3), geo.sample(body, 6)


@pytest.mark.parametrize("seed", range(6))
def test_lp_monotone_under_refinement(seed):
    rng = np.random.default_rng(500 + seed)
    body = random_body(rng, d=2, kind="polytope")
    for coarse, fine in _nested_pairs(body):
        # nested lattices: every coarse point appears in the fine grid
        D = np.linalg.norm(coarse.points[:, None] - fine.points[None], axis=2).min(axis=1)
        assert D.max() <= 1e-12
        lo, _ = delta_lower_lp(body, coarse)
        hi, _ = delta_lower_lp(body, fine)
        assert hi >= lo - 1e-8


def _bracket(body):
    b = delta_bounds(body, 4 if body.dim == 2 else 3)
    return b.lower, b.upper


@pytest.mark.parametrize("seed", range(10))
def test_bracket_validity_and_invariance(seed):
    rng = np.random.default_rng(700 + seed)
    body = random_body(rng)
    lo, up = _bracket(body)
    assert 0 < lo <= up + 1e-8
    t = rng.uniform(-3, 3, body.dim)
    Q = random_rotation(body.dim, rng)
    lam = float(rng.uniform(0.5, 2.0))
    for moved, factor in ((body.translated(t), 1.0), (body.transformed(Q), 1.0),
                          (body.transformed(np.eye(body.dim), lam), lam * lam)):
        l2, u2 = _bracket(moved)
        assert abs(l2 - factor * lo) <= 1e-6
        assert abs(u2 - factor * up) <= 1e-6


def test_floor_positive_for_nondegenerate_bodies():
    rng = np.random.default_rng(9)
    for _ in range(20):
        body = random_body(rng)
        assert analytic_floor(body) > 0
        assert delta_bounds(body, 3).lower >= analytic_floor(body) - 1e-12


def test_witness_is_interpolable_and_diagnostics_recorded():
    b = delta_bounds(geo.Polytope(EQUILATERAL), 8)
    assert b.lower_witness.is_interpolable(1e-8)
    assert b.slack["lp_box_enlargements"] == 0
    assert {"floor", "recenter", "lp", "grid_points"} <= set(b.slack)
