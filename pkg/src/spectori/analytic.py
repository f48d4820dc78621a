"""Continuation of the fibre coordinate w along planar paths, contour
integration of Q(z) dz / w, and Puiseux expansion at infinity.

The continuation never chooses square roots globally.  A path is cut into
panels on which every factor (z - e) turns by a small angle, and inside a
panel

    w(z) = w(z_ref) * prod_e sqrt((z - e) / (z_ref - e))

with principal square roots.  That expression is analytic on the panel, so
quadrature nodes can be placed freely without sheet jumps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.special import binom

from .errors import SpectralError
from .paths import PlanarPath, Segment

DEFAULT_TOL = 1e-11
MAX_PANEL_ANGLE = math.pi / 6
MAX_ARC_SWEEP = math.pi / 8
NEAR_BRANCH_TOL = 1e-9

_GL_LO = np.polynomial.legendre.leggauss(10)
_GL_HI = np.polynomial.legendre.leggauss(20)


def _branch_points(curve) -> np.ndarray:
    if hasattr(curve, "smooth_branch_points"):
        return np.asarray(curve.smooth_branch_points, dtype=complex)
    return np.asarray(curve, dtype=complex)


def _poly_value(pts: np.ndarray, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    out = np.ones_like(z)
    for e in pts:
        out = out * (z - e)
    return out


@dataclass
class Panel:
    seg: Segment
    s0: float
    s1: float
    z_ref: complex
    w_ref: complex
    singular: Optional[str] = None      # 'start' / 'end' when a branch point sits there
    sing_point: Optional[complex] = None


@dataclass
class FiberTrack:
    """Samples (z, w) along a path with a continuous choice of w."""

    nodes: list
    max_step: float
    panels: list = field(default_factory=list, repr=False)

    @property
    def end(self) -> tuple:
        return self.nodes[-1]


def _ratio_sqrt(pts: np.ndarray, z, z_ref: complex, skip: Optional[complex] = None):
    z = np.asarray(z, dtype=complex)
    out = np.ones_like(z)
    for e in pts:
        if skip is not None and e == skip:
            continue
        out = out * np.sqrt((z - e) / (z_ref - e))
    return out


def _split_segment(seg: Segment, pts: np.ndarray, skip_start, skip_end) -> list:
    """Parameter cut points so that every factor turns by at most MAX_PANEL_ANGLE."""
    def ok(s0, s1):
        z0 = complex(seg.point(s0))
        z1 = complex(seg.point(s1))
        zm = complex(seg.point(0.5 * (s0 + s1)))
        if seg.kind == "arc" and abs(seg.sweep) * (s1 - s0) > MAX_ARC_SWEEP:
            return False
        for e in pts:
            if (skip_start is not None and e == skip_start and s0 == 0.0) or \
               (skip_end is not None and e == skip_end and s1 == 1.0):
                continue
            for za, zb in ((z0, z1), (z0, zm), (zm, z1)):
                if abs(np.angle((zb - e) / (za - e))) > MAX_PANEL_ANGLE:
                    return False
        return True

    out = [0.0]
    stack = [(0.0, 1.0)]
    pieces = []
    depth = 0
    while stack:
        s0, s1 = stack.pop()
        if ok(s0, s1) or s1 - s0 < 1e-13:
            pieces.append((s0, s1))
        else:
            m = 0.5 * (s0 + s1)
            stack.append((m, s1))
            stack.append((s0, m))
        depth += 1
        if depth > 200000:
            raise SpectralError("NEAR_BRANCH", "path cannot be panelled; it grazes a branch point")
    pieces.sort()
    return pieces


def _check_clearance(path: PlanarPath, pts: np.ndarray, min_clearance: float):
    if len(pts) == 0:
        return
    if path.clearance(pts) < min_clearance:
        raise SpectralError("NEAR_BRANCH", f"path passes within {path.clearance(pts):.2e} of a branch point")


def _find_branch(z: complex, pts: np.ndarray) -> Optional[complex]:
    if len(pts) == 0:
        return None
    k = int(np.argmin(np.abs(pts - z)))
    return complex(pts[k]) if abs(pts[k] - z) <= 1e-12 * max(1.0, abs(z)) else None


def continue_fiber(curve, path: PlanarPath, w0: complex, min_clearance: float = NEAR_BRANCH_TOL,
                   seed_tol: float = 1e-10) -> FiberTrack:
    """Carry w along ``path`` starting from the value ``w0``.

    For a path that begins on a branch point, ``w0`` is taken at the end of
    the first segment.
    """
    pts = _branch_points(curve)
    _check_clearance(path, pts, min_clearance)
    segs = list(path.segments)
    start_branch = _find_branch(path.start, pts) if path.branch_start else None
    end_branch = _find_branch(path.end, pts) if path.branch_end else None
    if path.branch_start and start_branch is None:
        raise SpectralError("SEED_OFF_CURVE", "path flagged to start on a branch point but does not")
    if path.branch_end and end_branch is None:
        raise SpectralError("SEED_OFF_CURVE", "path flagged to end on a branch point but does not")

    seed_z = segs[0].b if start_branch is not None else segs[0].a
    p_seed = complex(_poly_value(pts, seed_z))
    if abs(w0 * w0 - p_seed) > seed_tol * max(1.0, abs(p_seed)):
        raise SpectralError("SEED_OFF_CURVE", f"|w0^2 - P| = {abs(w0 * w0 - p_seed):.3e}")

    panels: list = []
    nodes: list = []
    w_cur = complex(w0)
    max_step = 0.0
    for k, seg in enumerate(segs):
        skip_s = start_branch if (k == 0 and start_branch is not None) else None
        skip_e = end_branch if (k == len(segs) - 1 and end_branch is not None) else None
        pieces = _split_segment(seg, pts, skip_s, skip_e)
        if skip_s is not None:
            # walk backwards from the seed at s = 1
            seg_panels = []
            w_b = w_cur
            z_b = complex(seg.point(1.0))
            for s0, s1 in reversed(pieces):
                z0 = complex(seg.point(s0))
                z1 = complex(seg.point(s1))
                if s0 == 0.0:
                    seg_panels.append(Panel(seg, s0, s1, z1, w_b, "start", skip_s))
                else:
                    w_a = w_b * complex(_ratio_sqrt(pts, z0, z1))
                    seg_panels.append(Panel(seg, s0, s1, z0, w_a, None))
                    w_b = w_a
                    z_b = z0
            seg_panels.reverse()
            panels.extend(seg_panels)
            nodes.append((complex(seg.point(0.0)), 0j))
            for pnl in seg_panels[1:]:
                nodes.append((pnl.z_ref, pnl.w_ref))
            nodes.append((complex(seg.point(1.0)), w_cur))
            for s0, s1 in pieces:
                max_step = max(max_step, abs(complex(seg.point(s1)) - complex(seg.point(s0))))
            continue
        if not nodes:
            nodes.append((complex(seg.point(0.0)), w_cur))
        for s0, s1 in pieces:
            z0 = complex(seg.point(s0))
            z1 = complex(seg.point(s1))
            max_step = max(max_step, abs(z1 - z0))
            if skip_e is not None and s1 == 1.0:
                panels.append(Panel(seg, s0, s1, z0, w_cur, "end", skip_e))
                w_cur = 0j
            else:
                panels.append(Panel(seg, s0, s1, z0, w_cur, None))
                w_new = w_cur * complex(_ratio_sqrt(pts, z1, z0))
                # each factor's root turns by at most half the panel angle
                bound = 0.5 * MAX_PANEL_ANGLE * len(pts) + 1e-9
                if abs(w_cur) > 0 and abs(np.angle(w_new / w_cur)) > bound:
                    raise SpectralError("NEAR_BRANCH", "continuity selector violated")
                w_cur = w_new
            nodes.append((z1, w_cur))
    return FiberTrack(nodes, max_step, panels)


def _panel_integrand(pnl: Panel, pts: np.ndarray, coeffs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Integrand (K x len(u)) in the panel's own variable u in [0, 1]."""
    seg = pnl.seg
    ds = pnl.s1 - pnl.s0
    if pnl.singular is None:
        s = pnl.s0 + ds * u
        z = seg.point(s)
        w = pnl.w_ref * _ratio_sqrt(pts, z, pnl.z_ref)
        jac = seg.velocity(s) * ds
        return npoly.polyval(z, coeffs) * (jac / w)
    e = pnl.sing_point
    if pnl.singular == "start":
        s = pnl.s0 + ds * u * u
        dsdu_over_u = 2.0 * ds
    else:
        s = pnl.s1 - ds * u * u
        dsdu_over_u = -2.0 * ds
    z = seg.point(s)
    # sqrt((z - e)/(z_ref - e)) = u exactly on a line through e
    rest = _ratio_sqrt(pts, z, pnl.z_ref, skip=e)
    jac = seg.velocity(s) * dsdu_over_u
    return npoly.polyval(z, coeffs) * (jac / (pnl.w_ref * rest))


def _gl(f, a: float, b: float, rule):
    x, wts = rule
    u = 0.5 * (b - a) * x + 0.5 * (a + b)
    vals = f(u)
    return vals @ wts * (0.5 * (b - a))


def _adaptive(f, tol: float, budget: int, rel_floor: float = 1e-13) -> np.ndarray:
    total = None
    stack = [(0.0, 1.0, 0)]
    used = 0
    while stack:
        a, b, depth = stack.pop()
        lo = _gl(f, a, b, _GL_LO)
        hi = _gl(f, a, b, _GL_HI)
        err = float(np.max(np.abs(hi - lo)))
        scale = float(np.max(np.abs(hi)))
        used += 1
        if err <= max(tol * (b - a), rel_floor * scale) or depth > 48:
            total = hi if total is None else total + hi
        else:
            if used > budget:
                raise SpectralError("NO_CONVERGENCE", "quadrature refinement budget exhausted")
            m = 0.5 * (a + b)
            stack.append((m, b, depth + 1))
            stack.append((a, m, depth + 1))
    return total


def _as_coeff_matrix(numerators) -> tuple:
    arr = np.asarray(numerators, dtype=complex)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    return arr.T, single  # polyval wants (deg+1, K)


def _roundoff_floor(pnl: Panel, pts: np.ndarray) -> float:
    """Relative accuracy reachable on a panel: z - e loses digits when |z| >> |z - e|."""
    if len(pts) == 0:
        return 1e-13
    z = pnl.seg.point(np.linspace(pnl.s0, pnl.s1, 5))
    dist = np.abs(z[:, None] - pts[None, :])
    if pnl.singular is not None:
        dist = dist[:, np.abs(pts - pnl.sing_point) > 0]
    if dist.size == 0:
        return 1e-13
    ratio = float(np.max(np.abs(z))) / max(float(np.min(dist)), 1e-300)
    return max(1e-13, 20 * np.finfo(float).eps * ratio)


def integrate_coeffs(numerators, curve, cycle, tol: float = DEFAULT_TOL, budget: int = 20000):
    """Integrate Q_k(z) dz / w over a lifted cycle for each coefficient row Q_k.

    Coefficients are in increasing-degree order.  Returns one complex value
    per row (or a scalar for a single row).
    """
    coeffs, single = _as_coeff_matrix(numerators)
    pts = _branch_points(curve)
    track = continue_fiber(pts, cycle.path, cycle.start_fiber)
    total_len = max(cycle.path.length, 1e-300)
    result = np.zeros(coeffs.shape[1], dtype=complex)
    for pnl in track.panels:
        frac = pnl.seg.length * (pnl.s1 - pnl.s0) / total_len
        if frac == 0.0:
            continue
        f = lambda u, pnl=pnl: _panel_integrand(pnl, pts, coeffs, u)
        result = result + _adaptive(f, tol * frac, budget, _roundoff_floor(pnl, pts))
    return result[0] if single else result


def integrate_over_pole(numerator, curve, cycle, pole: complex, tol: float = DEFAULT_TOL) -> complex:
    """Integral of Q(z) dz / ((z - pole) w) over a lifted cycle avoiding the pole."""
    coeffs, _ = _as_coeff_matrix(numerator)
    pts = _branch_points(curve)
    track = continue_fiber(pts, cycle.path, cycle.start_fiber)
    total = 0j
    for pnl in track.panels:
        def f(u, pnl=pnl):
            base = _panel_integrand(pnl, pts, coeffs, u)
            ds = pnl.s1 - pnl.s0
            if pnl.singular is None:
                s = pnl.s0 + ds * u
            elif pnl.singular == "start":
                s = pnl.s0 + ds * u * u
            else:
                s = pnl.s1 - ds * u * u
            return base / (pnl.seg.point(s) - pole)
        total += complex(_adaptive(f, tol, 20000, _roundoff_floor(pnl, pts))[0])
    return total


def integrate(numerator_roots: Sequence[complex], curve, cycle, tol: float = DEFAULT_TOL) -> complex:
    """Integral of prod(z - r) dz / w over the cycle (no prefactors applied)."""
    coeffs = npoly.polyfromroots(list(numerator_roots)) if len(numerator_roots) else np.array([1.0])
    return complex(integrate_coeffs(coeffs, curve, cycle, tol))


def fiber_at(curve, cycle, z_query: complex, segment_index: int, s: float) -> complex:
    """Value of w at parameter ``s`` of one segment of a lifted cycle."""
    pts = _branch_points(curve)
    track = continue_fiber(pts, cycle.path, cycle.start_fiber)
    seg = cycle.path.segments[segment_index]
    for pnl in track.panels:
        if pnl.seg is seg and pnl.s0 <= s <= pnl.s1:
            z = complex(seg.point(s))
            if pnl.singular is None:
                return pnl.w_ref * complex(_ratio_sqrt(pts, z, pnl.z_ref))
            e = pnl.sing_point
            u = math.sqrt(abs((s - pnl.s0) / (pnl.s1 - pnl.s0))) if pnl.singular == "start" \
                else math.sqrt(abs((pnl.s1 - s) / (pnl.s1 - pnl.s0)))
            return pnl.w_ref * u * complex(_ratio_sqrt(pts, z, pnl.z_ref, skip=e))
    raise ValueError("parameter outside the segment")


def integrate_to_branch(numerator, curve, branch: complex, z1: complex, w1: complex,
                        tol: float = DEFAULT_TOL) -> complex:
    """Integral of Q dz / w along the straight line from a branch point to z1.

    ``w1`` fixes the sheet at z1.  The endpoint singularity is removed by
    z = branch + (z1 - branch) u^2.
    """
    from .homology import LiftedCycle  # local import keeps module order simple

    path = PlanarPath((Segment.line(branch, z1),), closed=False, branch_start=True)
    cyc = LiftedCycle(path, complex(w1), "SEGMENT", None)
    return complex(integrate_coeffs(np.atleast_1d(numerator), curve, cyc, tol))


# ----------------------------------------------------------------------
# expansion at infinity
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class InfinityExpansion:
    """Q(z)/w = z^(-1/2) (1 + D/z + ...) in the normalised case."""

    leading_ok: bool
    D: complex
    residue_at_infinity: complex
    local_coefficients: tuple
    leading_exponent: float


def puiseux_coefficients(numerator, branch_points, order: int = 6) -> tuple:
    """Coefficients c_k with Q(z)/w = z^(m - d/2) * sum_k c_k z^(-k)."""
    q = np.trim_zeros(np.asarray(numerator, dtype=complex), "b")
    m = len(q) - 1
    pts = np.asarray(branch_points, dtype=complex)
    d = len(pts)
    series = np.zeros(order + 1, dtype=complex)
    series[0] = 1.0
    ks = np.arange(order + 1)
    for e in pts:
        factor = binom(-0.5, ks) * (-e) ** ks
        series = np.convolve(series, factor)[: order + 1]
    top = q[::-1][: order + 1]
    top = np.concatenate([top, np.zeros(order + 1 - len(top))])
    coeffs = np.convolve(top, series)[: order + 1]
    return m - d / 2.0, coeffs


def infinity_expansion(numerator_roots, curve, expected_exponent: float = -0.5,
                       coefficients=None) -> InfinityExpansion:
    """Expand a differential Q dz / w around z = infinity.

    Either roots or raw ``coefficients`` (increasing degree) describe Q.
    Fails with WRONG_DEGREE when the leading power is not ``expected_exponent``.
    """
    if coefficients is None:
        coefficients = npoly.polyfromroots(list(numerator_roots)) if len(numerator_roots) else [1.0]
    pts = _branch_points(curve)
    lead, c = puiseux_coefficients(coefficients, pts)
    if abs(lead - expected_exponent) > 1e-12:
        raise SpectralError("WRONG_DEGREE", f"leading power z^{lead} instead of z^{expected_exponent}")
    # z^lead * sum c_k z^-k : the exponent -1 never occurs for half-integer lead
    k_res = lead + 1.0
    residue = complex(-c[int(k_res)]) if float(k_res).is_integer() and 0 <= k_res < len(c) else 0j
    leading_ok = abs(c[0] - 1.0) < 1e-12
    D = complex(c[1] / c[0]) if c[0] != 0 else complex("nan")
    return InfinityExpansion(bool(leading_ok), D, residue, tuple(complex(x) for x in c[:4]), lead)
