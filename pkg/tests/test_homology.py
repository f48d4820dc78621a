import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_real_point
from spectori.analytic import continue_fiber, integrate
from spectori.errors import SpectralError
from spectori.geometry import Family, Sign, quotient_curves, validate_moduli_point
from spectori.homology import (
    canonical_contours, dump_contours, involution_image, is_symplectic, large_circle,
    node_path, rho_factor, sheet_unit,
)


def winding(path, z0, samples=4000):
    """Argument-principle oracle on a dense polyline."""
    poly = path.polyline()
    if len(poly) < samples:
        t = np.linspace(0, len(poly) - 1, samples)
        poly = np.interp(t, np.arange(len(poly)), poly.real) + 1j * np.interp(t, np.arange(len(poly)), poly.imag)
    rel = poly - z0
    ang = np.angle(np.roll(rel, -1) / rel)
    return ang.sum() / (2 * math.pi)


def _pts(sysm):
    return list(sysm.curve.smooth_branch_points)


def test_odd_base_case_layout():
    p = validate_moduli_point(Family.ODD, 0, R=2.5)
    plus = canonical_contours(p, Sign.PLUS)
    minus = canonical_contours(p, Sign.MINUS)
    assert plus.a_cycles == () or len(plus.a_cycles) == 0
    assert [c.label for c in minus.a_cycles] == ["A(0)"]
    assert minus.intersection[0, 1] == 1
    assert set(plus.open_curves) == {"C(+1)", "C(-1)"}


def test_even_base_case_open_curves():
    p = validate_moduli_point(Family.EVEN, 0)
    plus = canonical_contours(p, Sign.PLUS)
    minus = canonical_contours(p, Sign.MINUS)
    c1 = plus.open_curves["C(+1)"]
    cm = minus.open_curves["C(-1)"]
    assert abs(c1.path.start - 2) < 1e-12 and abs(c1.path.end - 2) < 1e-12
    assert abs(cm.path.start + 2) < 1e-12 and abs(cm.path.end + 2) < 1e-12


def test_odd_genus_one_winding_numbers():
    p = validate_moduli_point(Family.ODD, 1, R=3.0, lambdas=[0.3 + 0.8j, 0.3 - 0.8j], real_form=True)
    a1 = canonical_contours(p, Sign.PLUS).a_cycles[0]
    assert round(winding(a1.path, 0.3 + 0.8j)) == 1
    assert round(winding(a1.path, 0.3 - 0.8j)) == 1
    assert round(winding(a1.path, 3.0)) == 0
    assert abs(winding(a1.path, 3.0)) < 1e-6


@settings(max_examples=12, deadline=None)
@given(st.integers(min_value=0, max_value=3), st.sampled_from(list(Family)),
       st.sampled_from(list(Sign)), st.integers(min_value=0, max_value=10 ** 6))
def test_symplectic_and_monodromy(n, family, sign, seed):
    p = random_real_point(np.random.default_rng(seed), family, n)
    sysm = canonical_contours(p, sign)
    assert is_symplectic(sysm.intersection)
    pts = _pts(sysm)
    for cyc in list(sysm.a_cycles) + list(sysm.b_cycles):
        end = continue_fiber(pts, cyc.path, cyc.start_fiber).end[1]
        assert abs(end - cyc.start_fiber) <= 1e-9 * max(1.0, abs(cyc.start_fiber))
        assert abs(cyc.start_fiber ** 2 - np.prod(cyc.path.start - np.array(pts))) < 1e-12 * max(1, abs(cyc.start_fiber) ** 2)


def test_a_cycle_sheet_rule_at_real_crossing(rng):
    for family in Family:
        for sign in Sign:
            p = random_real_point(rng, family, 2)
            sysm = canonical_contours(p, sign)
            unit = sheet_unit(family, sign)
            for cyc in sysm.a_cycles:
                if cyc.label == "A(0)":
                    continue
                z = cyc.path.start
                assert abs(z.imag) < 1e-12 and -2 < z.real < 2
                assert (cyc.start_fiber / unit).real > 0


def test_clearance_error():
    p = validate_moduli_point(Family.ODD, 0, R=2.5)
    with pytest.raises(SpectralError) as exc:
        canonical_contours(p, Sign.MINUS, delta=0.4)
    assert exc.value.code == "CLEARANCE"


def test_degenerate_near_two():
    p = validate_moduli_point(Family.ODD, 1, R=3.0, lambdas=[1.95 + 0.5j, 1.95 - 0.5j], real_form=True)
    with pytest.raises(SpectralError) as exc:
        canonical_contours(p, Sign.PLUS, delta=0.04)
    assert exc.value.code == "DEGENERATE"


def test_large_circle():
    p = validate_moduli_point(Family.ODD, 0, R=2.5)
    for sign in Sign:
        cyc = large_circle(p, 10.0, sign)
        pts = list(quotient_curves(p)[0 if sign is Sign.PLUS else 1].smooth_branch_points)
        end = continue_fiber(pts, cyc.path, cyc.start_fiber).end[1]
        # odd degree: the lift ends at the other preimage of z = mu, which is
        # the same point once the node at mu is formed
        assert abs(end + cyc.start_fiber) < 1e-9
    poly = large_circle(p, 10.0).path.polyline()
    # ∮ dz/z along the polyline, summed exactly as log increments
    assert abs(np.sum(np.log(poly[1:] / poly[:-1])) + 2j * math.pi) < 1e-9
    with pytest.raises(SpectralError) as exc:
        large_circle(p, 1.25)
    assert exc.value.code == "TOO_SMALL"


def test_node_path_endpoints():
    p = validate_moduli_point(Family.ODD, 0, R=2.5, mu=0.5, nu=0.0)
    lasso = node_path(p, Sign.MINUS)
    assert abs(lasso.path.start - 0.5) < 1e-12 and abs(lasso.path.end - 0.5) < 1e-12


def test_involutions(rng):
    p = random_real_point(rng, Family.ODD, 1)
    for sign in Sign:
        sysm = canonical_contours(p, sign)
        pts = _pts(sysm)
        for cyc in list(sysm.a_cycles) + list(sysm.b_cycles):
            twice = involution_image(involution_image(cyc, "SIGMA"), "SIGMA")
            assert twice.path is cyc.path and twice.start_fiber == cyc.start_fiber
            v = integrate([0.3], pts, cyc)
            assert abs(integrate([0.3], pts, involution_image(cyc, "SIGMA")) + v) < 1e-9
            # real structure: rho^* (Q dz / w) = factor * conj(Q dz / w) for real Q
            r = integrate([0.3], pts, involution_image(cyc, "RHO"))
            assert abs(r - rho_factor(p.family, sign) * np.conj(v)) < 1e-9 * max(1, abs(v))
        a = sysm.a_cycles[-1]
        img = involution_image(a, "RHO").path.polyline()
        orig = a.path.polyline()
        d = max(np.min(abs(orig - z)) for z in img[::10])
        assert d < 1e-2 * sysm.delta


def test_dump_contours_csv():
    p = validate_moduli_point(Family.EVEN, 1, lambdas=[0.2 + 0.7j, 0.2 - 0.7j], real_form=True)
    text = dump_contours([canonical_contours(p, s) for s in Sign])
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["curve", "label", "index", "re", "im"]
    labels = {r[1] for r in rows[1:]}
    assert {"A(1)", "B(1)", "C(+1)", "C(-1)"} <= labels
