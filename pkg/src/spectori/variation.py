"""Finite-difference derivatives of the period vectors, the span and H(mu)
matrices, and asymptotic probes on the circle |z| = mu."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from .analytic import DEFAULT_TOL, integrate_coeffs, integrate_over_pole
from .errors import SpectralError
from .geometry import Family, ModuliPoint, Sign, quotient_curves
from .homology import _all_points, canonical_contours, default_delta, large_circle
from .periods import (
    curve_data, hat_differential, invariant_set, normalize_second_kind, period_data,
)

MIN_STEP = 1e-10


# ----------------------------------------------------------------------
# generic finite differences
# ----------------------------------------------------------------------
def fd_derivative(f: Callable, x0, h: float, richardson: bool = True) -> tuple:
    """Central difference of f at x0 with one Richardson step.

    Returns (estimate, error estimate).  ``f`` may return arrays.  Complex x0
    and h are allowed for holomorphic f.
    """
    if abs(h) < MIN_STEP * max(1.0, abs(x0)):
        raise SpectralError("STEP_TOO_SMALL", f"step {abs(h):.2e} below the noise floor")
    d1 = (np.asarray(f(x0 + h)) - np.asarray(f(x0 - h))) / (2 * h)
    if not richardson:
        return d1, float("nan")
    h2 = h / 2
    d2 = (np.asarray(f(x0 + h2)) - np.asarray(f(x0 - h2))) / (2 * h2)
    est = (4 * d2 - d1) / 3
    return est, float(np.max(np.abs(est - d2)))


def one_sided_derivative(f: Callable, h: float, f0=None) -> np.ndarray:
    """Second-order forward difference at 0: (-3 f(0) + 4 f(h) - f(2h)) / 2h."""
    f0 = np.asarray(f(0.0)) if f0 is None else f0
    return (-3 * f0 + 4 * np.asarray(f(h)) - np.asarray(f(2 * h))) / (2 * h)


def second_derivative_even(f: Callable, h: float, f0=None) -> tuple:
    """f''(0) for an even function, from 2 (f(h) - f(0)) / h^2 plus Richardson."""
    f0 = np.asarray(f(0.0)) if f0 is None else f0
    g1 = 2 * (np.asarray(f(h)) - f0) / h ** 2
    g2 = 2 * (np.asarray(f(h / 2)) - f0) / (h / 2) ** 2
    est = (4 * g2 - g1) / 3
    return est, float(np.max(np.abs(est - g2)))


# ----------------------------------------------------------------------
# period vector as a function of the coordinates
# ----------------------------------------------------------------------
def stacked_periods(p: ModuliPoint, delta=None, tol: float = DEFAULT_TOL, hat: bool = False) -> np.ndarray:
    d = period_data(p, delta, tol)
    vec = d.Ihat if hat else d.I
    return vec.stacked if p.real_form else vec.stacked_complex


def _step(p: ModuliPoint) -> float:
    pts = _all_points(p.base()) + ([complex(p.mu)] if p.mu is not None else [])
    sep = min(abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:])
    return 2e-3 * sep


def _shared_delta(p: ModuliPoint) -> float:
    if p.is_degenerate:
        pts = _all_points(p.base()) + [complex(p.mu)]
        return 0.1 * min(abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:])
    return default_delta(p.expanded() if p.mu is not None else p)


def moduli_directions(p: ModuliPoint) -> list:
    """(name, function t -> ModuliPoint) for d/dR and the lambda directions."""
    out = []
    if p.family is Family.ODD:
        out.append(("R", lambda t: p.with_coordinates(R=p.R + t)))
    lam = list(p.lambdas)
    if p.real_form:
        for i in range(p.n):
            def re_dir(t, i=i):
                q = list(lam)
                q[2 * i] += t
                q[2 * i + 1] += t
                return p.with_coordinates(lambdas=q)

            def im_dir(t, i=i):
                q = list(lam)
                q[2 * i] += 1j * t
                q[2 * i + 1] -= 1j * t
                return p.with_coordinates(lambdas=q)
            out += [(f"Re lambda{2 * i + 1}", re_dir), (f"Im lambda{2 * i + 1}", im_dir)]
    else:
        for j in range(2 * p.n):
            def hol(t, j=j):
                q = list(lam)
                q[j] += t
                return p.with_coordinates(lambdas=q)
            out.append((f"lambda{j + 1}", hol))
    return out


def moduli_derivatives(p: ModuliPoint, h: Optional[float] = None, delta=None, hat: bool = False) -> tuple:
    """Columns d/dR I (ODD) and d/dlambda I, by Richardson central differences."""
    h = _step(p) if h is None else h
    delta = _shared_delta(p) if delta is None else delta
    cols, names = [], []
    for name, move in moduli_directions(p):
        est, _ = fd_derivative(lambda t: stacked_periods(move(t), delta, hat=hat), 0.0, h)
        cols.append(est)
        names.append(name)
    if not cols:
        return np.zeros((0, 0)), names
    return np.column_stack(cols), names


# ----------------------------------------------------------------------
# span rank and the H(mu) matrix
# ----------------------------------------------------------------------
@dataclass
class SpanResult:
    rank: int
    size: int
    singular_values: np.ndarray
    condition: float
    matrix: np.ndarray = field(repr=False, default=None)


def span_rank(p: ModuliPoint, rel_tol: float = 1e-8) -> SpanResult:
    """Rank of {(I_+,0), (0,I_-), d/dR I, d/dlambda I}.

    On a nodal point (nu = 0) the vectors are the rows of H(mu), which adds
    d/dmu and d2/dnu2 to that list.
    """
    if p.is_degenerate:
        hr = h_matrix(p)
        sv = np.linalg.svd(hr.matrix, compute_uv=False)
        rank = int(np.sum(sv > rel_tol * sv[0]))
        return SpanResult(rank, hr.matrix.shape[0], sv, hr.condition, hr.matrix)
    d = period_data(p, _shared_delta(p))
    I = d.I
    npl, nmi = len(I.plus), len(I.minus)
    plus = I.plus if p.real_form else I.raw_plus
    minus = I.minus if p.real_form else I.raw_minus
    cols = [np.concatenate([plus, np.zeros(nmi)]), np.concatenate([np.zeros(npl), minus])]
    derivs, _ = moduli_derivatives(p)
    if derivs.size:
        cols += list(derivs.T)
    mat = np.column_stack(cols)
    sv = np.linalg.svd(mat, compute_uv=False)
    rank = int(np.sum(sv > rel_tol * sv[0]))
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    return SpanResult(rank, min(mat.shape), sv, cond, mat)


@dataclass
class HResult:
    matrix: np.ndarray
    det: float
    condition: float
    rows: list


def nu_family(p0: ModuliPoint, delta=None) -> Callable:
    """nu -> stacked period vector of (p, mu, nu); nu = 0 uses the nodal curve."""
    def f(nu):
        return stacked_periods(p0.with_coordinates(nu=float(nu)), None if nu else delta)
    return f


def h_matrix(p0: ModuliPoint, h_nu: Optional[float] = None, delta: Optional[float] = None) -> HResult:
    """Rows (I_+,0), (0,I_-), d/dR, d/dlambda, d/dmu, d^2/dnu^2 at (p, mu, 0)."""
    if not p0.is_degenerate:
        raise SpectralError("DEGENERATE", "h_matrix needs a nodal point (nu = 0)")
    delta = _shared_delta(p0) if delta is None else delta
    d = period_data(p0, delta)
    I = d.I
    npl, nmi = len(I.plus), len(I.minus)
    rows = [np.concatenate([I.plus, np.zeros(nmi)]), np.concatenate([np.zeros(npl), I.minus])]
    names = ["(I+,0)", "(0,I-)"]
    derivs, dn = moduli_derivatives(p0, delta=delta)
    if derivs.size:
        rows += list(derivs.T)
        names += [f"d/d{x}" for x in dn]
    h = _step(p0)
    dmu, _ = fd_derivative(lambda t: stacked_periods(p0.with_coordinates(mu=p0.mu + t), delta), 0.0, h)
    rows.append(dmu)
    names.append("d/dmu")
    # the step follows the point, not the contour clearance
    h_nu = 0.02 * _shared_delta(p0) if h_nu is None else h_nu
    d2, _ = second_derivative_even(nu_family(p0, delta), h_nu, f0=I.stacked)
    rows.append(d2)
    names.append("d2/dnu2")
    mat = np.array(rows).real
    sv = np.linalg.svd(mat, compute_uv=False)
    return HResult(mat, float(np.linalg.det(mat)), float(sv[0] / sv[-1]), names)


# ----------------------------------------------------------------------
# asymptotics on |z| = mu
# ----------------------------------------------------------------------
def circle_period(p: ModuliPoint, mu: float, sign: Sign, numerator, tol: float = DEFAULT_TOL) -> complex:
    """b_{n+1} period of N dz/w for the nodal point (p, mu, 0): minus the clockwise circle integral."""
    plus, minus = quotient_curves(p.base())
    curve = plus if sign is Sign.PLUS else minus
    gamma = large_circle(p, mu, sign, "CW")
    return -complex(integrate_coeffs(np.asarray(numerator, dtype=complex), curve, gamma, tol))


def third_kind_kappa(p: ModuliPoint, mu: float, sign: Sign, tol: float = DEFAULT_TOL) -> complex:
    """Leading coefficient kappa of the normalised third-kind differential
    kappa prod(z - beta_j) dz / ((z - mu) w) with residue +1 at the start of the
    circle |z| = mu and vanishing a-periods."""
    sysm = canonical_contours(p.base(), sign)
    curve = sysm.curve
    m = len(sysm.a_cycles)
    # basis z^k / (z - mu), k = 0..m, realised as numerators over (z - mu) w:
    # integrate on the a-cycles with a rational integrand via partial fractions
    A = np.zeros((m, m + 1), dtype=complex)
    for k in range(m + 1):
        # z^k/(z-mu) = q_k(z) + mu^k/(z-mu)
        q = np.zeros(max(k, 1), dtype=complex)
        for j in range(k):
            q[j] = mu ** (k - 1 - j)
        for i, cyc in enumerate(sysm.a_cycles):
            poly_part = integrate_coeffs(q, curve, cyc, tol) if k > 0 else 0.0
            A[i, k] = poly_part + mu ** k * integrate_over_pole(np.ones(1), curve, cyc, mu, tol)
    gamma = large_circle(p, mu, sign, "CW")
    w0 = gamma.start_fiber
    # residue of z^k dz / ((z - mu) w) at (mu, w0) is mu^k / w0
    res = np.array([mu ** k / w0 for k in range(m + 1)])
    M = np.vstack([A, res[None, :]])
    rhs = np.zeros(m + 1, dtype=complex)
    rhs[-1] = 1.0
    coef = np.linalg.solve(M, rhs)
    return complex(coef[-1])


@dataclass
class ProbeResult:
    kind: str
    sign: Sign
    mus: np.ndarray
    values: np.ndarray
    model: np.ndarray
    residuals: np.ndarray
    fitted_order: float
    scaled: np.ndarray
    extra: dict = field(default_factory=dict)


def _fit_order(mus, res) -> float:
    a = np.abs(res)
    if len(a) < 2 or np.any(a == 0):
        return float("nan")
    slope, _ = np.polyfit(np.log(mus), np.log(a), 1)
    return float(slope)


def asymptotic_probe(p: ModuliPoint, kind: str, mus, sign: Sign = Sign.PLUS,
                     tol: float = 1e-13) -> ProbeResult:
    """Probe the large-mu behaviour of the nodal point (p, mu, 0).

    kinds: B_NEXT_PERIOD (b_{n+1} period of Omega vs 4 mu^1/2 - 4 D mu^-1/2),
    KAPPA (same period vs 4 kappa), HAT_B_NEXT (b_{n+1} period of the hat
    differential: leading and next coefficients).
    """
    kind = kind.upper()
    mus = np.asarray(mus, dtype=float)
    cd = curve_data(p.base(), sign)
    D = complex(0.5 * np.sum(cd.system.curve.smooth_branch_points) - np.sum(cd.omega.zetas))
    vals, model, extra = [], [], {"D": D}
    if kind in ("B_NEXT_PERIOD", "KAPPA"):
        for mu in mus:
            v = circle_period(p, mu, sign, cd.omega.numerator, tol)
            vals.append(v)
            if kind == "KAPPA":
                model.append(4 * third_kind_kappa(p, mu, sign))
            else:
                model.append(4 * mu ** 0.5 - 4 * D * mu ** -0.5)
        vals, model = np.array(vals), np.array(model)
        res = vals - model
        scaled = res * mus ** 1.5
    elif kind == "HAT_B_NEXT":
        for mu in mus:
            vals.append(circle_period(p, mu, sign, cd.hat.numerator, tol))
        vals = np.array(vals)
        lead = vals / mus ** 1.5
        nxt = (vals - 2 * mus ** 1.5) / mus ** 0.5
        model = 2 * mus ** 1.5 + 6 * D * mus ** 0.5
        res = vals - model
        scaled = res * mus ** 0.5
        extra.update(leading=lead, next=nxt)
    else:
        raise ValueError(f"unknown probe {kind}")
    return ProbeResult(kind, sign, mus, vals, model, res, _fit_order(mus, res), scaled, extra)
