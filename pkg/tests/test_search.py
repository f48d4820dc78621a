import math
from fractions import Fraction

import numpy as np
import pytest

from spectori import search
from spectori.errors import SpectralError
from spectori.geometry import Family, ModuliPoint, validate_moduli_point
from spectori.search import (
    RationalTarget, SpectralCandidate, integer_scaling, newton_to_rational, pushforward_check,
    rational_project, real_coordinates, scale_and_type, verify_candidate,
)


def test_rational_project_examples():
    r = rational_project([6.0, 10.0], 50)
    assert r.ratios == [Fraction(3, 5)] and r.distance == 0
    # the default chart divides by the last entry
    r = rational_project([1.0, math.pi], 100)
    assert r.ratios == [Fraction(7, 22)]
    r = rational_project([1.0, math.pi], 100, chart=0)
    assert r.ratios == [Fraction(311, 99)] and r.distance < 1e-4
    r = rational_project([4.2], 10)
    assert r.ratios == [] and r.distance == 0
    with pytest.raises(SpectralError) as exc:
        rational_project([0.0, 0.0], 10)
    assert exc.value.code == "ZERO_VECTOR"


def test_integer_scaling():
    s, ints, res = integer_scaling([6.0, 10.0], 50)
    assert s == 0.5 and ints == (3, 5) and res == 0
    s, ints, _ = integer_scaling([-8.0], 50)
    assert s == 0.125 and ints == (-1,)
    with pytest.raises(SpectralError) as exc:
        integer_scaling([1.0, math.pi], 50)
    assert exc.value.code == "NOT_RATIONAL"
    with pytest.raises(SpectralError) as exc:
        integer_scaling([45.0, 1.0], 40)
    assert exc.value.code == "OVERFLOW"


def test_even_base_scaling():
    c = scale_and_type(validate_moduli_point(Family.EVEN, 0))
    assert c.s_plus == pytest.approx(1 / 8, abs=1e-12) and c.s_minus == pytest.approx(1 / 8, abs=1e-12)
    assert c.ints_plus == (-1,) and c.ints_minus == (1,)
    assert abs(c.tau - 1j) < 1e-12


@pytest.fixture(scope="module")
def genus_one():
    target = RationalTarget([Fraction(3, 5)], [], 50)
    res = newton_to_rational(validate_moduli_point(Family.ODD, 0, R=4.0), target)
    return target, res


def test_newton_genus_one(genus_one):
    target, res = genus_one
    assert abs(res.point.R - 4.25) < 1e-10
    assert res.residual <= 1e-10
    again = newton_to_rational(res.point, target)
    assert again.iterations == 0
    assert np.max(np.abs(real_coordinates(again.point) - real_coordinates(res.point))) <= 1e-12


def test_newton_singular_jacobian(monkeypatch):
    monkeypatch.setattr(search, "chart_residual", lambda p, target, delta=None: np.array([0.3]))
    with pytest.raises(SpectralError) as exc:
        newton_to_rational(validate_moduli_point(Family.ODD, 0, R=4.0), RationalTarget([Fraction(3, 5)], []))
    assert exc.value.code == "NO_PROGRESS"


def test_candidate_and_tampering(genus_one):
    _, res = genus_one
    c = scale_and_type(res.point)
    assert c.ints_plus == (3, 5) and c.ints_minus == (1,)
    assert abs(c.s_plus - 0.5) < 1e-10
    rep = verify_candidate(c)
    assert rep.overall, rep.lines()
    assert all(r <= 1e-8 for _, r in rep.checks.values())
    # a fresh derivation with half the clearance reproduces the integers
    rep2 = verify_candidate(c, delta=0.5 * 0.1 * 0.25)
    assert rep2.checks["c_integral_periods"][0]
    back = SpectralCandidate.from_record(c.to_record())
    assert back.ints_plus == c.ints_plus and back.s_plus == c.s_plus and back.tau == c.tau

    bad = SpectralCandidate(c.point, c.s_plus + 1e-3, c.s_minus, c.ints_plus, c.ints_minus, c.tau, {}, 1)
    rep = verify_candidate(bad)
    ok, r = rep.checks["c_integral_periods"]
    assert not ok and not rep.overall
    assert abs(r - 1e-3 * 10) < 1e-6


def test_unit_circle_tamper():
    # real lambdas in (-2, 2) lie over |x| = 1
    p = ModuliPoint(Family.ODD, 1, 3.0, (0.5 + 0j, -0.7 + 0j), False)
    c = SpectralCandidate(p, 1.0, 1.0, (1, 1, 1), (1, 1), 1j, {}, 2)
    rep = verify_candidate(c)
    assert not rep.checks["a_real_branch_set"][0]
    assert not rep.overall


def test_pushforward_A0():
    assert pushforward_check(validate_moduli_point(Family.ODD, 0, R=4.25)) < 1e-10
