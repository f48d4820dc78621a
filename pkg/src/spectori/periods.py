"""Normalised second-kind differentials, their period vectors and the scalar
invariants D, eta, chi, xi together with the Moebius map T_p.

Every differential here has the form N(z) dz / w with a polynomial N, so it
is stored by the coefficients of N (increasing degree).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from .analytic import DEFAULT_TOL, infinity_expansion, integrate_coeffs
from .errors import SpectralError
from .geometry import Family, ModuliPoint, QuotientCurve, Sign
from .homology import CycleSystem, canonical_contours, node_path

REPEATED_ZETA_TOL = 1e-8
DECOMPOSITION_TOL = 1e-7


@dataclass
class SecondKindDifferential:
    curve_sign: Sign
    zetas: np.ndarray
    numerator: np.ndarray               # N(z), increasing degree
    hat_coefficients: Optional[np.ndarray] = None
    a_residual: float = 0.0
    distinct: bool = True

    @property
    def is_hat(self) -> bool:
        return self.hat_coefficients is not None


def _a_matrix(curve, a_cycles, tol) -> np.ndarray:
    m = len(a_cycles)
    rows = np.eye(m + 1, dtype=complex)          # monomials 1, z, ..., z^m
    out = np.zeros((m, m + 1), dtype=complex)
    for i, cyc in enumerate(a_cycles):
        out[i] = integrate_coeffs(rows, curve, cyc, tol)
    return out


def normalize_second_kind(curve: QuotientCurve, a_cycles, tol: float = DEFAULT_TOL) -> SecondKindDifferential:
    """Monic N of degree len(a_cycles) with every a-period of N dz/w zero."""
    m = len(a_cycles)
    if m == 0:
        return SecondKindDifferential(curve.sign, np.zeros(0, dtype=complex), np.ones(1, dtype=complex))
    A = _a_matrix(curve, a_cycles, tol)
    M, rhs = A[:, :m], -A[:, m]
    if np.linalg.cond(M) > 1e12:
        raise SpectralError("SINGULAR_SYSTEM", "a-period matrix of the holomorphic basis is singular")
    x = np.linalg.solve(M, rhs)
    numer = np.concatenate([x, [1.0]])
    zetas = np.sort_complex(npoly.polyroots(numer)) if m > 0 else np.zeros(0, dtype=complex)
    resid = float(np.max(np.abs(A @ numer)))
    return SecondKindDifferential(curve.sign, zetas, numer, None, resid, _distinct(zetas))


def _distinct(zetas) -> bool:
    z = list(zetas)
    return all(abs(a - b) > REPEATED_ZETA_TOL for i, a in enumerate(z) for b in z[i + 1:])


def hat_differential(curve: QuotientCurve, a_cycles, omega: SecondKindDifferential,
                     tol: float = DEFAULT_TOL) -> SecondKindDifferential:
    """(3/2) z Omega + sum_j c_j Omega/(z - zeta_j) with vanishing a-periods."""
    m = len(a_cycles)
    lead = 1.5 * npoly.polymulx(omega.numerator)
    if m == 0:
        return SecondKindDifferential(curve.sign, omega.zetas, lead, np.zeros(0))
    if not omega.distinct:
        raise SpectralError("REPEATED_ZETA", "zeros of Omega are not pairwise distinct")
    basis = []
    for j in range(m):
        others = [z for k, z in enumerate(omega.zetas) if k != j]
        q = npoly.polyfromroots(others) if others else np.ones(1, dtype=complex)
        basis.append(np.pad(q.astype(complex), (0, m + 2 - len(q))))
    rows = np.array(basis + [np.pad(lead, (0, m + 2 - len(lead)))])
    per = np.array([integrate_coeffs(rows, curve, cyc, tol) for cyc in a_cycles])  # (m, m+1)
    M, rhs = per[:, :m], -per[:, m]
    if np.linalg.cond(M) > 1e12:
        raise SpectralError("SINGULAR_SYSTEM", "hat system is singular")
    c = np.linalg.solve(M, rhs)
    numer = rows[m] + c @ rows[:m]
    resid = float(np.max(np.abs(per @ np.concatenate([c, [1.0]]))))
    return SecondKindDifferential(curve.sign, omega.zetas, np.trim_zeros(numer, "b"), c, resid, True)


def closed_form_D(curve: QuotientCurve, omega: SecondKindDifferential) -> complex:
    """D = half the sum of branch points minus the sum of the zeros of Omega."""
    return 0.5 * complex(np.sum(curve.smooth_branch_points)) - complex(np.sum(omega.zetas))


def expansion_D(curve: QuotientCurve, omega: SecondKindDifferential) -> complex:
    exp = infinity_expansion(omega.zetas, curve)
    return exp.D


# ----------------------------------------------------------------------
# period vectors
# ----------------------------------------------------------------------
@dataclass
class PeriodVector:
    plus: np.ndarray
    minus: np.ndarray
    raw_plus: np.ndarray
    raw_minus: np.ndarray
    realness_residual: float

    @property
    def stacked(self) -> np.ndarray:
        return np.concatenate([self.plus, self.minus])

    @property
    def stacked_complex(self) -> np.ndarray:
        return np.concatenate([self.raw_plus, self.raw_minus])


@dataclass
class CurveData:
    system: CycleSystem
    omega: SecondKindDifferential
    hat: SecondKindDifferential
    node: object = None


@dataclass
class PeriodData:
    point: ModuliPoint
    plus: CurveData
    minus: CurveData
    I: PeriodVector
    Ihat: PeriodVector
    D_plus: float
    D_minus: float
    extras: dict = field(default_factory=dict)


def _prefactor(family: Family, sign: Sign) -> complex:
    if family is Family.ODD:
        return 1j if sign is Sign.PLUS else 1.0
    return 1.0 if sign is Sign.PLUS else 1j


def _cycle_list(family: Family, sign: Sign, cd: CurveData) -> list:
    out = []
    sysm = cd.system
    if family is Family.ODD and sign is Sign.PLUS:
        out += [sysm.open_curves["C(+1)"], sysm.open_curves["C(-1)"]]
    elif family is Family.EVEN:
        out.append(sysm.open_curves["C(+1)" if sign is Sign.PLUS else "C(-1)"])
    out += list(sysm.b_cycles)
    if cd.node is not None:
        out.append(cd.node)
    return out


def _raw_periods(curve, cycles, numerators, tol) -> np.ndarray:
    rows = np.array(numerators)
    return np.array([integrate_coeffs(rows, curve, c, tol) for c in cycles]).T  # (K, len)


def _pad(vecs) -> np.ndarray:
    width = max(len(v) for v in vecs)
    return np.array([np.pad(np.asarray(v, dtype=complex), (0, width - len(v))) for v in vecs])


def curve_data(p: ModuliPoint, sign: Sign, delta=None, tol: float = DEFAULT_TOL) -> CurveData:
    sysm = canonical_contours(p, sign, delta)
    omega = normalize_second_kind(sysm.curve, sysm.a_cycles, tol)
    hat = hat_differential(sysm.curve, sysm.a_cycles, omega, tol)
    node = node_path(p, sign, sysm.delta) if p.is_degenerate else None
    return CurveData(sysm, omega, hat, node)


def period_data(p: ModuliPoint, delta=None, tol: float = DEFAULT_TOL) -> PeriodData:
    """Differentials, period vectors I, I-hat and D for both quotient curves."""
    fam = p.family
    cds = {s: curve_data(p, s, delta, tol) for s in (Sign.PLUS, Sign.MINUS)}
    vecs, hats, resid = {}, {}, 0.0
    for s, cd in cds.items():
        cycles = _cycle_list(fam, s, cd)
        nums = _pad([cd.omega.numerator, cd.hat.numerator])
        raw = _raw_periods(cd.system.curve, cycles, nums, tol) * _prefactor(fam, s)
        vecs[s], hats[s] = raw[0], raw[1]
        resid = max(resid, float(np.max(np.abs(raw.imag))) if raw.size else 0.0)
    I = PeriodVector(vecs[Sign.PLUS].real, vecs[Sign.MINUS].real, vecs[Sign.PLUS], vecs[Sign.MINUS],
                     float(max(np.max(np.abs(vecs[s].imag)) for s in vecs)))
    Ih = PeriodVector(hats[Sign.PLUS].real, hats[Sign.MINUS].real, hats[Sign.PLUS], hats[Sign.MINUS],
                      float(max(np.max(np.abs(hats[s].imag)) for s in hats)))
    Dp = closed_form_D(cds[Sign.PLUS].system.curve, cds[Sign.PLUS].omega)
    Dm = closed_form_D(cds[Sign.MINUS].system.curve, cds[Sign.MINUS].omega)
    return PeriodData(p, cds[Sign.PLUS], cds[Sign.MINUS], I, Ih, Dp.real, Dm.real,
                      {"D_plus_complex": Dp, "D_minus_complex": Dm})


def period_vectors(p: ModuliPoint, delta=None, tol: float = DEFAULT_TOL) -> PeriodVector:
    return period_data(p, delta, tol).I


# ----------------------------------------------------------------------
# invariants
# ----------------------------------------------------------------------
@dataclass
class InvariantSet:
    D_plus: float
    D_minus: float
    eta_plus: float
    eta_minus: float
    chi: Optional[float]
    xis: np.ndarray
    mobius: tuple
    residual: float
    condition: float

    @property
    def delta_D(self) -> float:
        return self.D_plus - self.D_minus

    @property
    def delta_eta(self) -> float:
        return self.eta_plus - self.eta_minus


def mobius_coefficients(dD: float) -> tuple:
    """(a, b, c, d) of x -> dD (3x - 4 dD) / (4x - 5 dD)."""
    return (3 * dD, -4 * dD * dD, 4.0, -5 * dD)


def apply_mobius(coeffs: tuple, x: float) -> float:
    a, b, c, d = coeffs
    den = c * x + d
    return np.inf if den == 0 else (a * x + b) / den


def invariant_set(data: PeriodData, derivs: Optional[np.ndarray] = None, names=None) -> InvariantSet:
    """Decompose (I-hat_+, I-hat_-) in the basis (I_+,0), (0,I_-), d/dR I, d/dlambda I.

    ``derivs`` holds the derivative vectors as columns (ODD: d/dR first).  In
    the even family the coefficients of (I_+,0) and (0,I_-) are eta^+ and
    eta^-; in the odd family eta, chi and xi are the negated coefficients,
    i.e. I-hat + eta^+ (I_+,0) + eta^- (0,I_-) lies in the derivative span.
    """
    p = data.point
    if derivs is None:
        from .variation import moduli_derivatives
        derivs, names = moduli_derivatives(p)
    I, Ih = data.I, data.Ihat
    npl, nmi = len(I.plus), len(I.minus)
    complex_mode = not p.real_form
    if complex_mode:
        ip = np.concatenate([I.raw_plus, np.zeros(nmi)])
        im = np.concatenate([np.zeros(npl), I.raw_minus])
        target = Ih.stacked_complex
    else:
        ip = np.concatenate([I.plus, np.zeros(nmi)])
        im = np.concatenate([np.zeros(npl), I.minus])
        target = Ih.stacked
    basis = np.column_stack([ip, im] + ([derivs] if np.ndim(derivs) == 2 and derivs.size else []))
    if basis.shape[1] != basis.shape[0]:
        raise SpectralError("RANK_DEFICIENT", f"basis is {basis.shape[0]}x{basis.shape[1]}")
    sv = np.linalg.svd(basis, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    if not np.isfinite(cond) or cond > 1e10:
        raise SpectralError("RANK_DEFICIENT", f"span matrix condition number {cond:.3e}")
    coef, *_ = np.linalg.lstsq(basis, target, rcond=None)
    resid = float(np.max(np.abs(basis @ coef - target)))
    if resid > DECOMPOSITION_TOL * max(1.0, float(np.max(np.abs(target)))):
        raise SpectralError("RANK_DEFICIENT", f"decomposition residual {resid:.3e}")
    sgn = -1.0 if p.family is Family.ODD else 1.0
    coef = sgn * (coef if complex_mode else coef.real)
    if p.family is Family.ODD:
        chi, xis = coef[2], coef[3:]
    else:
        chi, xis = None, coef[2:]
    dD = data.D_plus - data.D_minus
    return InvariantSet(data.D_plus, data.D_minus, coef[0], coef[1], chi, np.asarray(xis),
                        mobius_coefficients(dD), resid, cond)


@dataclass
class ObstructionResult:
    k: int
    value: float
    ok: bool
    status: str


def obstruction_check(inv: InvariantSet, m: int, margin: float = 1e-8) -> list:
    """5 dD + 4 T^k(d eta) for k = 0..m, with T iterated projectively."""
    dD = inv.delta_D
    scale = max(1.0, abs(dD), abs(inv.delta_eta))
    out = []
    x = np.array([inv.delta_eta, 1.0])
    a, b, c, d = inv.mobius
    mat = np.array([[a, b], [c, d]])
    degenerate = abs(dD) <= margin * scale
    for k in range(m + 1):
        if k > 0:
            if degenerate:
                out.append(ObstructionResult(k, 0.0, False, "DEGENERATE"))
                continue
            x = mat @ x
            x = x / np.max(np.abs(x))
        if abs(x[1]) <= margin * abs(x[0]):
            out.append(ObstructionResult(k, np.inf, False, "MOBIUS_POLE"))
            continue
        val = 5 * dD + 4 * x[0] / x[1]
        ok = abs(val) > margin * scale
        out.append(ObstructionResult(k, float(val), bool(ok), "OK" if ok else "VANISHES"))
    return out
