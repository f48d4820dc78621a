"""Rational targets, Newton iteration on the moduli, integer scaling and
candidate verification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .analytic import DEFAULT_TOL, integrate_coeffs, integrate_over_pole
from .errors import SpectralError
from .geometry import Family, ModuliPoint, Sign, spectral_model, validate_moduli_point
from .homology import LiftedCycle, involution_image, pick_fiber, rho_factor
from .paths import stadium
from .periods import _cycle_list, period_data
from .variation import fd_derivative

MAX_NEWTON = 60


# ----------------------------------------------------------------------
# rational projection
# ----------------------------------------------------------------------
@dataclass
class RationalProjection:
    ratios: list            # Fractions, one per non-chart entry
    values: np.ndarray      # the real affine ratios
    distance: float         # max relative distance |r - q| / max(1, |r|)
    chart: int


def affine_ratios(v, chart: int = -1) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.size == 0 or not np.any(v):
        raise SpectralError("ZERO_VECTOR", "cannot project the zero vector")
    c = chart % v.size
    if v[c] == 0:
        raise SpectralError("ZERO_VECTOR", "chart entry vanishes")
    return np.delete(v, c) / v[c]


def rational_project(v, max_den: int, chart: int = -1) -> RationalProjection:
    """Best rational approximations (denominator <= max_den) of the affine ratios."""
    r = affine_ratios(v, chart)
    fr = [Fraction(float(x)).limit_denominator(max_den) for x in r]
    dist = max((abs(float(q) - x) / max(1.0, abs(x)) for q, x in zip(fr, r)), default=0.0)
    return RationalProjection(fr, r, float(dist), chart)


@dataclass
class RationalTarget:
    plus: list
    minus: list
    max_den: int = 50

    @classmethod
    def from_vectors(cls, plus, minus, max_den: int = 50) -> "RationalTarget":
        return cls(rational_project(plus, max_den).ratios if len(plus) > 1 else [],
                   rational_project(minus, max_den).ratios if len(minus) > 1 else [], max_den)


# ----------------------------------------------------------------------
# Newton on the real coordinates
# ----------------------------------------------------------------------
def real_coordinates(p: ModuliPoint) -> np.ndarray:
    out = [p.R] if p.family is Family.ODD else []
    for i in range(p.n):
        lam = p.lambdas[2 * i]
        out += [lam.real, lam.imag]
    return np.array(out, dtype=float)


def from_coordinates(p: ModuliPoint, x) -> ModuliPoint:
    x = list(x)
    R = x.pop(0) if p.family is Family.ODD else None
    lam = []
    for i in range(p.n):
        z = complex(x[2 * i], x[2 * i + 1])
        lam += [z, z.conjugate()]
    return validate_moduli_point(p.family, p.n, R, lam, real_form=True)


def chart_residual(p: ModuliPoint, target: RationalTarget, delta=None) -> np.ndarray:
    I = period_data(p, delta).I
    res = []
    if len(I.plus) > 1:
        res += list(affine_ratios(I.plus) - np.array([float(q) for q in target.plus]))
    if len(I.minus) > 1:
        res += list(affine_ratios(I.minus) - np.array([float(q) for q in target.minus]))
    return np.array(res, dtype=float)


@dataclass
class NewtonResult:
    point: ModuliPoint
    residual: float
    iterations: int
    history: list = field(default_factory=list)


def newton_to_rational(p0: ModuliPoint, target: RationalTarget, tol: float = 1e-12,
                       max_iter: int = MAX_NEWTON) -> NewtonResult:
    """Damped Newton on p -> affine ratios of (I_+, I_-) with a finite-difference Jacobian."""
    if not p0.real_form and p0.n > 0:
        raise SpectralError("LEFT_MODULI", "Newton runs on real-form points")
    x = real_coordinates(p0)
    p = p0
    F = chart_residual(p, target)
    norm = float(np.max(np.abs(F))) if F.size else 0.0
    history = [norm]
    it = 0
    while norm > tol:
        if it >= max_iter:
            raise SpectralError("MAX_ITER", f"residual {norm:.3e} after {it} iterations")
        h = 1e-6 * max(1.0, float(np.max(np.abs(x))))
        cols = []
        for k in range(len(x)):
            def g(t, k=k):
                xk = x.copy()
                xk[k] += t
                return chart_residual(from_coordinates(p, xk), target)
            col, _ = fd_derivative(g, 0.0, h)
            cols.append(col)
        J = np.column_stack(cols)
        if np.linalg.cond(J) > 1e12:
            raise SpectralError("NO_PROGRESS", "Jacobian of the chart map is singular")
        step = np.linalg.solve(J, -F)
        lam = 1.0
        for _ in range(30):
            try:
                cand = from_coordinates(p, x + lam * step)
                Fc = chart_residual(cand, target)
                nc = float(np.max(np.abs(Fc)))
            except SpectralError:
                nc = math.inf
            if nc < norm:
                break
            lam /= 2
        else:
            raise SpectralError("NO_PROGRESS", f"line search failed at residual {norm:.3e}")
        x, p, F, norm = x + lam * step, cand, Fc, nc
        history.append(norm)
        it += 1
    return NewtonResult(p, norm, it, history)


# ----------------------------------------------------------------------
# scaling and conformal type
# ----------------------------------------------------------------------
@dataclass
class SpectralCandidate:
    point: ModuliPoint
    s_plus: float
    s_minus: float
    ints_plus: tuple
    ints_minus: tuple
    tau: complex
    residuals: dict
    genus: int

    def to_record(self) -> str:
        ip = ",".join(str(k) for k in self.ints_plus)
        im = ",".join(str(k) for k in self.ints_minus)
        return (f"{self.point.to_record()} sPlus={float(self.s_plus)!r} sMinus={float(self.s_minus)!r} "
                f"intPlus={ip} intMinus={im} tau={float(self.tau.imag)!r}i genus={self.genus}")

    @classmethod
    def from_record(cls, text: str) -> "SpectralCandidate":
        own = {"sPlus", "sMinus", "intPlus", "intMinus", "tau", "genus"}
        fields, rest = {}, []
        for tok in text.split():
            key, _, val = tok.partition("=")
            if key in own:
                fields[key] = val
            else:
                rest.append(tok)
        try:
            p = ModuliPoint.from_record(" ".join(rest))
            ints = lambda s: tuple(int(k) for k in s.split(",") if k)
            return cls(p, float(fields["sPlus"]), float(fields["sMinus"]), ints(fields["intPlus"]),
                       ints(fields["intMinus"]), complex(0, float(fields["tau"].rstrip("i"))), {},
                       int(fields["genus"]))
        except (KeyError, ValueError) as exc:
            raise SpectralError("PARSE", f"bad candidate record: {exc}") from exc


def integer_scaling(v, max_int: int, tol: float = 1e-9) -> tuple:
    """Smallest s > 0 with s*v a primitive integer vector; returns (s, ints, residual)."""
    v = np.asarray(v, dtype=float)
    if len(v) == 1:
        ints = (1 if v[0] > 0 else -1,)
        return 1.0 / abs(v[0]), ints, 0.0
    proj = rational_project(v, max_int)
    if proj.distance > tol:
        raise SpectralError("NOT_RATIONAL", f"ratios off by {proj.distance:.3e}")
    fr = proj.ratios + [Fraction(1)]
    den = 1
    for q in fr:
        den = den * q.denominator // math.gcd(den, q.denominator)
    ints = [int(q * den) for q in fr]
    g = 0
    for k in ints:
        g = math.gcd(g, abs(k))
    ints = [k // g for k in ints]
    s = ints[-1] / v[-1]
    if s < 0:
        s, ints = -s, [-k for k in ints]
    if max(abs(k) for k in ints) > max_int:
        raise SpectralError("OVERFLOW", f"integers exceed {max_int}")
    resid = float(np.max(np.abs(s * v - np.array(ints))))
    return float(s), tuple(ints), resid


def scale_and_type(p: ModuliPoint, max_int: int = 50, tol: float = 1e-9, data=None) -> SpectralCandidate:
    data = period_data(p) if data is None else data
    sp, kp, rp = integer_scaling(data.I.plus, max_int, tol)
    sm, km, rm = integer_scaling(data.I.minus, max_int, tol)
    tau = 1j * sp / sm
    return SpectralCandidate(p, float(sp), float(sm), kp, km, complex(tau), {"plus": rp, "minus": rm}, p.genus)


# ----------------------------------------------------------------------
# verification
# ----------------------------------------------------------------------
@dataclass
class VerificationReport:
    checks: dict
    overall: bool

    def lines(self) -> list:
        return [f"{name}: {'PASS' if ok else 'FAIL'} residual={res:.3e}"
                for name, (ok, res) in self.checks.items()]


def _involution_residuals(data, tol) -> tuple:
    sig, rho = 0.0, 0.0
    fam = data.point.family
    for sign, cd in ((Sign.PLUS, data.plus), (Sign.MINUS, data.minus)):
        curve = cd.system.curve
        eps = rho_factor(fam, sign)
        cycles = list(cd.system.a_cycles) + _cycle_list(fam, sign, cd)
        for diff in (cd.omega, cd.hat):
            for c in cycles:
                v = complex(integrate_coeffs(diff.numerator, curve, c, tol))
                vs = complex(integrate_coeffs(diff.numerator, curve, involution_image(c, "SIGMA"), tol))
                sig = max(sig, abs(vs + v))
                if data.point.real_form:
                    vr = complex(integrate_coeffs(diff.numerator, curve, involution_image(c, "RHO"), tol))
                    rho = max(rho, abs(vr - eps * v.conjugate()))
    return sig, rho


def pushforward_check(p: ModuliPoint, tol: float = DEFAULT_TOL) -> float:
    """For ODD n = 0: the X-level period of q_-^* Omega_- over A_0 (twice a_0^-) vanishes.

    With z = x + 1/x and w_- = (x^2 - 1) y / x^2 the pull-back of (z - zeta) dz / w_-
    is (x^2 - zeta x + 1) dx / (x y).
    """
    model = spectral_model(p)
    data = period_data(p)
    zeta = complex(data.minus.omega.zetas[0])
    r = max(model.pairs[0], key=abs)
    rin = 1 / r
    width = 0.25 * min(abs(r - rin), abs(rin))
    loop = stadium(complex(rin), complex(r), width)
    pts = np.array(model.x_branch_points)
    cyc = LiftedCycle(loop, pick_fiber(pts, loop.start, 1.0), "A0_X", None)
    val = integrate_over_pole(np.array([1.0, -zeta, 1.0]), pts, cyc, 0.0, tol)
    return abs(val)


def verify_candidate(c: SpectralCandidate, tol: float = 1e-8, delta=None) -> VerificationReport:
    checks = {}
    p = c.point
    # (a) reality of the branch set and no points over the unit circle
    try:
        model = spectral_model(p)
        pts = [b for b in model.x_branch_points if b != 0]
        miss = max((min(abs(1 / np.conj(b) - q) for q in pts) for b in pts), default=0.0)
        unit = min((abs(abs(b) - 1) for b in pts), default=1.0)
        checks["a_real_branch_set"] = (miss <= tol and unit > 1e-9, float(miss))
    except SpectralError as exc:
        model = None
        checks["a_real_branch_set"] = (False, math.inf if exc.code != "UNIT_MODULUS" else 0.0)
    # (b) simple zero at x = 0, odd degree so a simple branch point at infinity
    if model is not None:
        zeros = sum(1 for b in model.x_branch_points if abs(b) < 1e-12)
        deg = len(model.x_branch_points)
        checks["b_zero_and_infinity"] = (zeros == 1 and deg % 2 == 1, 0.0)
    else:
        checks["b_zero_and_infinity"] = (False, math.inf)
    # (c) integrality of all computed periods, open-curve entries included
    try:
        data = period_data(p, delta)
    except SpectralError:
        for name in ("c_integral_periods", "d_sigma_odd", "d_rho_real"):
            checks[name] = (False, math.inf)
        data = None
    if data is not None:
        _period_checks(c, data, tol, checks)
    # (e) independent principal parts: rectangular conformal type
    ok_e = c.s_plus != 0 and c.s_minus != 0 and math.isfinite(abs(c.tau)) and abs(c.tau.real) <= tol \
        and abs(c.tau.imag) > 0
    checks["e_independent_principal_parts"] = (bool(ok_e), abs(c.tau.real))
    # (f) conformality: P(0) = 0
    checks["f_conformal"] = (bool(model is not None and model.has_zero_branch), 0.0)
    if p.family is Family.ODD and p.n == 0:
        r = pushforward_check(p)
        checks["g_pushforward_A0"] = (r <= tol, r)
    overall = all(ok for ok, _ in checks.values())
    return VerificationReport(checks, overall)


def _period_checks(c: SpectralCandidate, data, tol: float, checks: dict) -> None:
    p = c.point
    rp = float(np.max(np.abs(c.s_plus * data.I.plus - np.array(c.ints_plus, dtype=float)))) \
        if len(c.ints_plus) == len(data.I.plus) else math.inf
    rm = float(np.max(np.abs(c.s_minus * data.I.minus - np.array(c.ints_minus, dtype=float)))) \
        if len(c.ints_minus) == len(data.I.minus) else math.inf
    imag = max(data.I.realness_residual * abs(c.s_plus), data.I.realness_residual * abs(c.s_minus))
    res_c = max(rp, rm, imag)
    checks["c_integral_periods"] = (res_c <= tol, res_c)
    # (d) sigma-oddness and rho-reality of both differentials
    sig, rho = _involution_residuals(data, DEFAULT_TOL)
    checks["d_sigma_odd"] = (sig <= tol, sig)
    checks["d_rho_real"] = (rho <= tol or not p.real_form, rho)
