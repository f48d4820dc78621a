import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import trapezoid_cycle
from spectori.analytic import (
    continue_fiber, infinity_expansion, integrate, integrate_coeffs, integrate_over_pole,
    integrate_to_branch, puiseux_coefficients,
)
from spectori.errors import SpectralError
from spectori.homology import LiftedCycle, pick_fiber
from spectori.paths import PlanarPath, Segment, stadium


def _circle(c, r, w0):
    return LiftedCycle(PlanarPath((Segment.arc(c, r, 0.0, 2 * math.pi),), closed=True), w0, "T", None)


def test_single_branch_circle_flips_sheet():
    pts = np.array([0.0 + 0j])
    track = continue_fiber(pts, _circle(0, 1.0, 1.0).path, 1.0)
    assert abs(track.end[1] + 1.0) < 1e-12


def test_circle_around_pair_closes():
    pts = np.array([-0.5 + 0j, 0.5 + 0j])
    path = PlanarPath((Segment.arc(0, 2.0, 0.0, 2 * math.pi),), closed=True)
    w0 = pick_fiber(pts, 2.0, 1.0)
    assert abs(continue_fiber(pts, path, w0).end[1] - w0) < 1e-12


def test_residue_of_dz_over_w_at_infinity():
    # w^2 = z^2 - 1; dz / w ~ dz / z; ccw circle gives 2 pi i
    pts = np.array([-1.0 + 0j, 1.0 + 0j])
    val = integrate([], pts, _circle(0, 3.0, pick_fiber(pts, 3.0, 1.0)))
    assert abs(val - 2j * math.pi) < 1e-11


def test_endpoint_substitution_sqrt():
    # ∫_e^{e+1} dz / sqrt(z - e) = 2
    e = 0.3 + 0.1j
    path = PlanarPath((Segment.line(e, e + 1),), closed=False, branch_start=True)
    cyc = LiftedCycle(path, 1.0, "S", None)
    assert abs(integrate([], np.array([e]), cyc) - 2) < 1e-12


def test_integrate_to_branch_matches_closed_form():
    # ∫_e^{e+4} dz / w with w(e + 4) = ±2 is ±4
    e = 1.0 + 0j
    for w1 in (2.0, -2.0):
        val = integrate_to_branch(np.array([1.0]), np.array([e]), e, e + 4, w1)
        assert abs(val - 2 * w1) < 1e-12


def test_near_branch_rejected():
    pts = np.array([0.0 + 0j])
    path = PlanarPath((Segment.line(-1, 1),), closed=False)
    with pytest.raises(SpectralError) as exc:
        continue_fiber(pts, path, 1j)
    assert exc.value.code == "NEAR_BRANCH"


def test_seed_off_curve():
    pts = np.array([0.0 + 0j])
    with pytest.raises(SpectralError) as exc:
        continue_fiber(pts, _circle(0, 1.0, 3.0).path, 3.0)
    assert exc.value.code == "SEED_OFF_CURVE"


def test_pole_integral_residue():
    # (1/((z - mu) w)) around a small circle at mu, w ~ const: 2 pi i / w(mu)
    pts = np.array([-3.0 + 0j, 3.0 + 0j])
    mu = 0.5
    w_mu = pick_fiber(pts, mu + 0.1, 1j)
    cyc = _circle(mu, 0.1, w_mu)
    expected = 2j * math.pi / pick_fiber(pts, mu, 1j)
    assert abs(integrate_over_pole(np.ones(1), pts, cyc, mu) - expected) < 1e-10


def test_infinity_expansion_D_matches_formula():
    pts = np.array([2.5, 2.0, -2.0, 0.3 + 0.8j, 0.3 - 0.8j], dtype=complex)
    zetas = [0.7, -0.4 + 0.1j]
    exp = infinity_expansion(zetas, pts)
    assert exp.leading_ok and exp.residue_at_infinity == 0
    assert abs(exp.D - (0.5 * pts.sum() - sum(zetas))) < 1e-12


def test_wrong_degree():
    with pytest.raises(SpectralError) as exc:
        infinity_expansion([0.1, 0.2], np.array([1.0, 2.0, 3.0]))
    assert exc.value.code == "WRONG_DEGREE"


def test_puiseux_against_direct_evaluation():
    pts = np.array([1.0, -0.5 + 0.2j, -0.5 - 0.2j])
    q = np.array([0.3, 1.0])
    lead, c = puiseux_coefficients(q, pts, order=8)
    z = 40.0 + 25.0j
    series = z ** lead * sum(ck * z ** -k for k, ck in enumerate(c))
    w = np.sqrt(np.prod(z - pts))
    w = w if abs(w - z ** 1.5) < abs(w + z ** 1.5) else -w
    assert abs(series - (0.3 + z) / w) < 1e-12


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=-1.0, max_value=1.0), st.floats(min_value=0.2, max_value=1.0),
       st.integers(min_value=0, max_value=3))
def test_adaptive_matches_trapezoid_oracle(x, y, k):
    pts = np.array([2.4, x + 1j * y, x - 1j * y], dtype=complex)
    loop = stadium(pts[1], pts[2], 0.15)
    w0 = pick_fiber(pts, loop.start, 1.0)
    cyc = LiftedCycle(loop, w0, "A", None)
    num = np.zeros(k + 1)
    num[k] = 1.0
    a = integrate_coeffs(num, pts, cyc)
    b = trapezoid_cycle(num, pts, loop, w0)
    assert abs(a - b) < 1e-6 * max(1.0, abs(a))


def test_sigma_odd_integrals():
    pts = np.array([2.4, 0.2 + 0.6j, 0.2 - 0.6j], dtype=complex)
    loop = stadium(pts[1], pts[2], 0.2)
    w0 = pick_fiber(pts, loop.start, 1.0)
    a = integrate([], pts, LiftedCycle(loop, w0, "A", None))
    b = integrate([], pts, LiftedCycle(loop, -w0, "A", None))
    assert abs(a + b) < 1e-13
