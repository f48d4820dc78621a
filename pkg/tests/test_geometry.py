import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectori.errors import SpectralError
from spectori.geometry import (
    Family, ModuliPoint, Sign, branch_separation, inverse_joukowski, quotient_curves,
    quotient_map_check, spectral_model, validate_moduli_point,
)


def test_odd_genus_one_curves():
    p = validate_moduli_point("ODD", 0, 2.5)
    plus, minus = quotient_curves(p)
    assert plus.degree == 1 and minus.degree == 3
    assert sorted(np.real(minus.branch_points)) == [-2, 2, 2.5]
    assert p.genus == 1


def test_even_genus_zero_curves():
    plus, minus = quotient_curves(validate_moduli_point("EVEN", 0))
    assert list(plus.branch_points) == [-2] and list(minus.branch_points) == [2]


@pytest.mark.parametrize("kwargs,code", [
    (dict(family="ODD", n=1, R=3.0, lambdas=[0.1 + 0.5j]), "REJECT_SIZE"),
    (dict(family="ODD", n=0, R=1.5), "REJECT_RANGE"),
    (dict(family="ODD", n=1, R=3.0, lambdas=[2 + 0j, 0.5j]), "REJECT_COLLISION"),
    (dict(family="EVEN", n=1, lambdas=[0.1 + 0.5j, 0.2 - 0.5j], real_form=True), "REJECT_CONJUGACY"),
])
def test_validation_errors(kwargs, code):
    with pytest.raises(SpectralError) as exc:
        validate_moduli_point(**kwargs)
    assert exc.value.code == code


def test_real_form_detected_and_ordered():
    p = validate_moduli_point("ODD", 1, 3.0, [0.3 - 0.8j, 0.3 + 0.8j])
    assert p.real_form
    assert p.lambdas[0].imag > 0


def test_degenerate_point_expansion():
    p = validate_moduli_point("ODD", 0, 2.5, mu=0.5, nu=0.0)
    assert p.is_degenerate
    with pytest.raises(SpectralError):
        p.expanded()
    q = p.with_coordinates(nu=0.1).expanded()
    assert q.n == 1 and q.lambdas[0] == complex(0.5, 0.1)
    plus, _ = quotient_curves(p)
    assert plus.degenerate_root == 0.5
    assert len(plus.smooth_branch_points) == 1


def test_inverse_joukowski_roots():
    a, b = inverse_joukowski(2.5)
    assert abs(a - 2) < 1e-14 and abs(b - 0.5) < 1e-14
    a, b = inverse_joukowski(0.3 + 0.8j)
    assert abs(a + 1 / a - (0.3 + 0.8j)) < 1e-13 and abs(a * b - 1) < 1e-13


def test_unit_modulus_rejected():
    # lambda = 1 is alpha + 1/alpha with |alpha| = 1
    p = ModuliPoint(Family.EVEN, 1, None, (1.0 + 1e-12j, 1.0 - 1e-12j), True)
    with pytest.raises(SpectralError) as exc:
        spectral_model(p)
    assert exc.value.code == "UNIT_MODULUS"


@pytest.mark.parametrize("family", ["ODD", "EVEN"])
def test_quotient_map_lands_on_both_curves(family):
    p = validate_moduli_point(family, 1, 3.0 if family == "ODD" else None, [0.3 + 0.8j, 0.3 - 0.8j])
    model = spectral_model(p)
    x = 0.7 + 0.4j
    y = np.sqrt(complex(model.poly(x)))
    img = quotient_map_check(p, x, y)
    assert img.residual_plus < 1e-12 and img.residual_minus < 1e-12
    with pytest.raises(SpectralError):
        quotient_map_check(p, x, 2 * y)


def test_branch_separation():
    assert branch_separation([0, 1, 3j]) == 1


coord = st.floats(min_value=-1.5, max_value=1.5, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["ODD", "EVEN"]), coord, st.floats(min_value=0.1, max_value=1.0),
       st.floats(min_value=2.1, max_value=5.0))
def test_record_roundtrip(family, re, im, R):
    p = validate_moduli_point(family, 1, R if family == "ODD" else None, [complex(re, im), complex(re, -im)])
    q = ModuliPoint.from_record(p.to_record())
    assert q == p


def test_bad_record():
    with pytest.raises(SpectralError) as exc:
        ModuliPoint.from_record("family=ODD R=3")
    assert exc.value.code == "PARSE"
