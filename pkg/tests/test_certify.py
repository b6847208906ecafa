import time
from math import pi, sqrt

import numpy as np
import pytest

from instances import certified_instance, theorem12_instance
from oracles import PROP11_BOUND, example11_delta, refined_min_norm
from zerocert import geometry as geo
from zerocert.certify import (
    PREMISE_FAILS,
    PREMISE_VERIFIED,
    VIOLATION,
    certify_near_zero,
    check_theorem12,
    eta_lower_bound,
    example11_table,
    search_small_delta,
)
from zerocert.errors import ContainmentError, NoCertificate, UnsupportedVariant
from zerocert.minimax import hull_certificate
from zerocert.operators import make_catalog_operator

PROP11 = {"x1": [0, 0], "x2": [1, 0], "w": [1, 0], "u": [1, 0], "v": [0, 1]}
UNIT_SEG = geo.Segment([0, 0], [1, 0])
UNIT_BALL = geo.Ball([0, 0], 1)


def prop11():
    return make_catalog_operator("prop11_circle", PROP11)


def translation():
    return make_catalog_operator("translation", {"c": [0, 2]})


# ---------------------------------------------------------------- eta


def test_eta_prop11_resolution_64():
    e = eta_lower_bound(prop11(), UNIT_SEG, 64)
    h = 1 / 128
    assert e.grid_min == pytest.approx(1.0, abs=1e-14)
    assert e.covering_radius == h
    assert e.modulus == pytest.approx(pi + pi ** 2 * h, rel=1e-9)
    # 1 - (pi + pi^2 h) h: the pi^2 h^2 term is part of the certified slack
    assert e.value == pytest.approx(1 - (pi + pi ** 2 * h) * h, abs=1e-9)
    assert e.value <= e.grid_min and e.certified


def test_eta_translation_and_identity():
    e = eta_lower_bound(translation(), UNIT_BALL, 32)
    assert 1 - e.modulus * e.covering_radius - 1e-12 <= e.value <= 1.0
    assert e.value > 0.9
    e = eta_lower_bound(make_catalog_operator("identity"), geo.Segment([-1, 0], [1, 0]), 16)
    assert e.value == 0.0


# ---------------------------------------------------------------- threshold theorem harness


def test_theorem12_translation_l_zero():
    v = check_theorem12(translation(), geo.Segment([-0.1, 0], [0.1, 0]), UNIT_BALL, 16)
    assert v.premise and v.threshold == np.inf
    assert v.verdict == PREMISE_VERIFIED
    assert v.sup_inf == pytest.approx(2.0, abs=1e-9)


def test_theorem12_prop11_premise_fails():
    v = check_theorem12(prop11(), UNIT_SEG, UNIT_SEG, 16)
    assert v.verdict == PREMISE_FAILS
    assert v.delta_upper == 0.25
    assert v.threshold <= 2 / pi ** 2 + 1e-12
    assert hull_certificate(prop11(), geo.sample(UNIT_SEG, 16), 1e-9).is_membership


def test_theorem12_requires_containment_and_L():
    with pytest.raises(ContainmentError):
        check_theorem12(translation(), geo.Segment([0, 0], [2, 0]), UNIT_BALL)
    with pytest.raises(UnsupportedVariant):
        check_theorem12(make_catalog_operator("example11"), UNIT_SEG, UNIT_SEG)


def test_theorem12_harness_200_instances():
    rng = np.random.default_rng(1212)
    t0 = time.perf_counter()
    verdicts = []
    for _ in range(200):
        op, X, V = theorem12_instance(rng)
        verdicts.append(check_theorem12(op, X, V, 8).verdict)
    assert time.perf_counter() - t0 < 60
    assert VIOLATION not in verdicts
    assert verdicts.count(PREMISE_VERIFIED) >= 50


def test_theorem12_flags_a_false_L():
    # an asserted L far below the true one makes the premise hold where the
    # conclusion is false: the harness must report the violation
    op = prop11()
    v = check_theorem12(op, UNIT_SEG, UNIT_SEG, 16, L=0.5)
    assert v.premise and v.verdict == VIOLATION


# ---------------------------------------------------------------- near-zero certificates


def test_certify_prop11():
    c = certify_near_zero(prop11(), UNIT_SEG, 16)
    assert c.claimed_bound == pytest.approx(PROP11_BOUND, abs=1e-9)
    assert c.validation_grid_min == pytest.approx(1.0, abs=1e-12)
    assert c.validation_grid_min <= c.claimed_bound
    assert c.status == "ok" and c.L_provenance == "known" and c.watermark == ""


def test_certify_identity_exact_zero():
    c = certify_near_zero(make_catalog_operator("identity"), geo.Segment([-1, 0], [1, 0]), 16, L=0.0)
    assert c.delta_upper == 1.0
    assert c.claimed_bound <= 1e-12
    assert c.validation_grid_min == 0.0
    assert c.watermark == "conditional on L" and c.L_provenance == "user-asserted"


def test_certify_square_map_near_one_one():
    X = geo.Segment([0.95, 0.95], [1.05, 1.05])
    c = certify_near_zero(make_catalog_operator("square_map"), X, 16)
    assert c.claimed_bound == pytest.approx(c.delta_upper + c.membership.residual)
    assert c.validation_grid_min <= c.claimed_bound


def test_certify_translation_has_no_certificate():
    with pytest.raises(NoCertificate) as info:
        certify_near_zero(translation(), UNIT_BALL, 8)
    assert info.value.payload.kind == "sample-separation"


def test_certificate_soundness_100_instances():
    rng = np.random.default_rng(2100)
    done = 0
    while done < 100:
        op, X = certified_instance(rng)
        try:
            c = certify_near_zero(op, X, 8)
        except NoCertificate:
            continue
        done += 1
        m = refined_min_norm(op, X, rng)
        assert m <= c.claimed_bound + 1e-6, (op.name, X, c.claimed_bound, m)
        assert c.status == "ok"
        assert c.membership.residual <= c.membership.tol


@pytest.mark.parametrize("op,z", [
    (make_catalog_operator("identity"), [0.0, 0.0]),
    (make_catalog_operator("square_map"), [0.0, 0.0]),
    (make_catalog_operator("square_map"), [1.0, 1.0]),
    (make_catalog_operator("translation", {"c": [0.5, -2.0]}), [-0.5, 2.0]),
    (make_catalog_operator("affine", {"A": [[2, 1], [0, 3]], "b": [-3, -3]}), [1.0, 1.0]),
])
def test_singleton_at_a_zero(op, z):
    c = certify_near_zero(op, geo.Segment(z, z), 4)
    assert c.delta_upper == 0.0
    assert c.membership.residual <= 1e-9
    assert c.claimed_bound <= 1e-9


# ---------------------------------------------------------------- search


def test_search_identity_ball():
    r = search_small_delta(make_catalog_operator("identity"), UNIT_BALL, 500)
    assert r.status == "found"
    assert r.delta_upper <= 1e-4 and r.residual <= 1e-9


def test_search_square_map_region():
    V = geo.Polytope([[-0.3, -0.2], [1.3, -0.2], [1.3, 1.4], [-0.3, 1.4]])
    r = search_small_delta(make_catalog_operator("square_map"), V, 500)
    assert r.delta_upper <= 1e-4 and r.residual <= 1e-9


def test_search_translation_is_empty():
    r = search_small_delta(translation(), UNIT_BALL, 2000)
    assert r.status == "empty" and r.best_body is None and r.trace == []


def test_search_example11():
    op = make_catalog_operator("example11")
    V = geo.Polytope([[0, -1], [12, -1], [12, 1], [0, 1]])
    r = search_small_delta(op, V, 2000)
    assert r.status == "found"
    assert r.delta_upper < 0.01
    assert r.evaluations <= 2000
    # the found body reproduces membership when rechecked
    assert hull_certificate(op, geo.sample(r.best_body, 128), 1e-9).is_membership
    for body, d, res in r.trace:
        assert d == pytest.approx(geo.diameter_squared(body) / 4)
        assert res <= 1e-9


def test_search_is_deterministic():
    op = make_catalog_operator("example11")
    V = geo.Polytope([[0, -1], [6, -1], [6, 1], [0, 1]])
    a, b = search_small_delta(op, V, 300), search_small_delta(op, V, 300)
    assert a.best_body == b.best_body and a.delta_upper == b.delta_upper


def test_search_budget_validation():
    with pytest.raises(ValueError):
        search_small_delta(translation(), UNIT_BALL, 0)


# ---------------------------------------------------------------- oscillating counterexample table


def test_example11_rows():
    t = example11_table(100)
    assert len(t.rows) == 100
    r1 = t.rows[0]
    assert r1.alpha == 1.0 and r1.beta == pytest.approx(sqrt(1.75))
    assert r1.phi_alpha == (0.0, 1.0) and r1.phi_beta == (0.0, -1.0)
    assert r1.delta_exact == pytest.approx(0.02606, abs=5e-6)
    assert all(r.paper_bound == 0.75 for r in t.rows)
    assert all(r.membership_residual == 0.0 for r in t.rows)
    d = [r.delta_exact for r in t.rows]
    assert all(x > y for x, y in zip(d, d[1:]))
    assert d[99] == pytest.approx(3.50e-4, abs=5e-7)
    assert all(d[n - 1] < 1e-3 for n in range(57, 101))
    for r in t.rows:
        assert r.delta_exact == pytest.approx(example11_delta(r.n), rel=1e-12)
    assert t.max_norm_deviation <= 1e-12 and not t.zero_in_image


def test_example11_operator_at_float_endpoints():
    op = make_catalog_operator("example11")
    for n in range(1, 101):
        a, b = sqrt(n), sqrt(n + 0.75)
        assert np.abs(op.eval([a, 0.0]) - [0, 1]).max() <= 1e-12
        assert np.abs(op.eval([b, 0.0]) - [0, -1]).max() <= 1e-12
