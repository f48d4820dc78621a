"""Moduli points, the quotient curves C_+ and C_-, and the fibre-product curve X.

A moduli point fixes the branch data of two hyperelliptic curves over the
z-line.  In the ODD family

    C_+ : w^2 = (z - R) prod (z - lambda_i)
    C_- : w^2 = (z - 2)(z + 2)(z - R) prod (z - lambda_i)

and in the EVEN family

    C_+ : w^2 = (z + 2) prod (z - lambda_i)
    C_- : w^2 = (z - 2) prod (z - lambda_i).

The fibre product X is the curve y^2 = P(x) obtained by substituting
z = x + 1/x; both quotient curves are images of X.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import SpectralError


class Family(enum.Enum):
    ODD = "ODD"
    EVEN = "EVEN"


class Sign(enum.Enum):
    PLUS = "PLUS"
    MINUS = "MINUS"

    @property
    def value_int(self) -> int:
        return 1 if self is Sign.PLUS else -1


COLLISION_TOL = 1e-12
UNIT_TOL = 1e-9


@dataclass(frozen=True)
class ModuliPoint:
    """A point of the moduli space, optionally with a degeneration pair.

    ``lambdas`` holds the 2n branch values grouped in consecutive pairs.  When
    ``mu`` is set the point stands for (p, mu, nu): an extra pair
    mu + i nu, mu - i nu is appended.  With ``nu == 0`` that pair collapses to
    a double root and the curves become nodal.
    """

    family: Family
    n: int
    R: Optional[float]
    lambdas: tuple
    real_form: bool = False
    mu: Optional[float] = None
    nu: Optional[float] = None

    @property
    def genus(self) -> int:
        return 2 * self.n + 1 if self.family is Family.ODD else 2 * self.n

    @property
    def is_degenerate(self) -> bool:
        return self.mu is not None and (self.nu is None or self.nu == 0.0)

    @property
    def has_extension(self) -> bool:
        return self.mu is not None

    def base(self) -> "ModuliPoint":
        """The point with the degeneration pair dropped."""
        return replace(self, mu=None, nu=None)

    def expanded(self) -> "ModuliPoint":
        """The (n+1)-point obtained by appending mu +- i nu as a genuine pair."""
        if self.mu is None:
            return self
        nu = self.nu or 0.0
        if nu == 0.0:
            raise SpectralError("DEGENERATE", "nu = 0 has no smooth expansion")
        upper = complex(self.mu, abs(nu))
        return ModuliPoint(self.family, self.n + 1, self.R,
                           tuple(self.lambdas) + (upper, upper.conjugate()),
                           self.real_form)

    def with_coordinates(self, R=None, lambdas=None, mu=None, nu=None) -> "ModuliPoint":
        return replace(
            self,
            R=self.R if R is None else R,
            lambdas=self.lambdas if lambdas is None else tuple(lambdas),
            mu=self.mu if mu is None else mu,
            nu=self.nu if nu is None else nu,
        )

    # ------------------------------------------------------------------
    # text records
    # ------------------------------------------------------------------
    def to_record(self) -> str:
        parts = [f"family={self.family.value}", f"n={self.n}"]
        if self.R is not None:
            parts.append(f"R={_fmt(self.R)}")
        lam = ";".join(f"{_fmt(z.real)},{_fmt(z.imag)}" for z in self.lambdas)
        parts.append(f"lambda={lam}")
        parts.append(f"realForm={'true' if self.real_form else 'false'}")
        if self.mu is not None:
            parts.append(f"mu={_fmt(self.mu)}")
            parts.append(f"nu={_fmt(self.nu or 0.0)}")
        return " ".join(parts)

    @classmethod
    def from_record(cls, text: str) -> "ModuliPoint":
        fields = {}
        for token in text.split():
            key, _, value = token.partition("=")
            fields[key] = value
        try:
            family = Family(fields["family"].upper())
            n = int(fields["n"])
            R = float(fields["R"]) if "R" in fields else None
            lambdas = []
            if fields.get("lambda"):
                for pair in fields["lambda"].split(";"):
                    re, im = pair.split(",")
                    lambdas.append(complex(float(re), float(im)))
            real_form = fields.get("realForm", "false") == "true"
            mu = float(fields["mu"]) if "mu" in fields else None
            nu = float(fields["nu"]) if "nu" in fields else None
        except (KeyError, ValueError) as exc:
            raise SpectralError("PARSE", f"bad moduli record: {exc}") from exc
        return cls(family, n, R, tuple(lambdas), real_form, mu, nu)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _close(a: complex, b: complex) -> bool:
    return abs(a - b) <= COLLISION_TOL * max(1.0, abs(a), abs(b))


def validate_moduli_point(family, n: int, R=None, lambdas: Sequence[complex] = (),
                          real_form: Optional[bool] = None, mu=None, nu=None) -> ModuliPoint:
    """Check the raw data and return a ModuliPoint.

    ``real_form=None`` detects the real form automatically; ``True`` demands
    it and fails with REJECT_CONJUGACY when the pairing is broken.
    """
    family = Family(family.upper()) if isinstance(family, str) else Family(family)
    lambdas = [complex(z) for z in lambdas]
    if n < 0 or len(lambdas) != 2 * n:
        raise SpectralError("REJECT_SIZE", f"need {2 * n} branch values, got {len(lambdas)}")
    if family is Family.ODD:
        if R is None or not math.isfinite(R) or R <= 2.0:
            raise SpectralError("REJECT_RANGE", f"R must exceed 2, got {R}")
        R = float(R)
    elif R is not None:
        raise SpectralError("REJECT_RANGE", "the EVEN family has no R")

    for lam in lambdas:
        if _close(lam, 2.0) or _close(lam, -2.0):
            raise SpectralError("REJECT_COLLISION", f"branch value {lam} hits +-2")
        if R is not None and _close(lam, R):
            raise SpectralError("REJECT_COLLISION", f"branch value {lam} equals R")
    for i in range(len(lambdas)):
        for j in range(i + 1, len(lambdas)):
            if _close(lambdas[i], lambdas[j]):
                raise SpectralError("REJECT_COLLISION", f"lambda_{i + 1} = lambda_{j + 1}")

    pairs = [(lambdas[2 * i], lambdas[2 * i + 1]) for i in range(n)]
    conj_ok = all(_close(a, b.conjugate()) and abs(a.imag) > 0 for a, b in pairs)
    range_ok = all(-2.0 < a.real < 2.0 for a, _ in pairs)
    if real_form is None:
        real_form = conj_ok and range_ok
    elif real_form:
        if not conj_ok:
            raise SpectralError("REJECT_CONJUGACY", "pairs are not complex conjugate")
        if not range_ok:
            raise SpectralError("REJECT_CONJUGACY", "pair real parts must lie in (-2, 2)")
    if real_form:
        fixed = []
        for a, _ in pairs:
            upper = complex(a.real, abs(a.imag))
            fixed += [upper, upper.conjugate()]
        lambdas = fixed

    if mu is not None:
        mu = float(mu)
        nu = 0.0 if nu is None else float(nu)
        extra = [complex(mu, abs(nu)), complex(mu, -abs(nu))]
        for e in extra:
            if _close(e, 2.0) or _close(e, -2.0) or (R is not None and _close(e, R)):
                raise SpectralError("REJECT_COLLISION", "degeneration pair hits a fixed branch point")
            if any(_close(e, lam) for lam in lambdas):
                raise SpectralError("REJECT_COLLISION", "degeneration pair hits a lambda")
        if real_form and not -2.0 < mu < 2.0 and nu != 0.0:
            raise SpectralError("REJECT_CONJUGACY", "mu must lie in (-2, 2) for a real point")
    elif nu is not None:
        raise SpectralError("REJECT_RANGE", "nu given without mu")

    return ModuliPoint(family, n, R, tuple(lambdas), bool(real_form), mu, nu)


# ----------------------------------------------------------------------
# quotient curves
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class QuotientCurve:
    """The hyperelliptic curve w^2 = prod(z - e) over the listed branch points."""

    sign: Sign
    branch_points: tuple
    degree: int
    degenerate_root: Optional[complex] = None

    @property
    def smooth_branch_points(self) -> np.ndarray:
        """Branch points of the normalisation (a double root is removed)."""
        pts = list(self.branch_points)
        if self.degenerate_root is not None:
            for _ in range(2):
                k = min(range(len(pts)), key=lambda i: abs(pts[i] - self.degenerate_root))
                pts.pop(k)
        return np.array(pts, dtype=complex)

    def poly(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for e in self.branch_points:
            out = out * (z - e)
        return out

    def on_curve_residual(self, z: complex, w: complex) -> float:
        p = complex(self.poly(z))
        return abs(w * w - p) / max(1.0, abs(p))


def _family_fixed_points(p: ModuliPoint, sign: Sign) -> list:
    if p.family is Family.ODD:
        return [p.R] if sign is Sign.PLUS else [2.0, -2.0, p.R]
    return [-2.0] if sign is Sign.PLUS else [2.0]


def quotient_curves(p: ModuliPoint) -> tuple:
    """The curves (C_+, C_-) of a moduli point."""
    out = []
    for sign in (Sign.PLUS, Sign.MINUS):
        pts = [complex(e) for e in _family_fixed_points(p, sign)] + list(p.lambdas)
        degenerate = None
        if p.mu is not None:
            nu = p.nu or 0.0
            pts += [complex(p.mu, abs(nu)), complex(p.mu, -abs(nu))]
            if nu == 0.0:
                degenerate = complex(p.mu)
        out.append(QuotientCurve(sign, tuple(pts), len(pts), degenerate))
    return tuple(out)


# ----------------------------------------------------------------------
# the fibre product X
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class SpectralModel:
    """Branch data of X in the x-plane (x = 0 and x = infinity included)."""

    x_branch_points: tuple
    genus: int
    has_zero_branch: bool = True
    pairs: tuple = field(default=())

    def poly(self, x):
        x = np.asarray(x, dtype=complex)
        out = np.ones_like(x)
        for b in self.x_branch_points:
            out = out * (x - b)
        return out


def inverse_joukowski(value: complex) -> tuple:
    """Roots of a^2 - value*a + 1 = 0, the one with larger modulus first."""
    disc = np.sqrt(complex(value) ** 2 - 4.0)
    a, b = (value + disc) / 2.0, (value - disc) / 2.0
    if abs(b) > abs(a):
        a, b = b, a
    return complex(a), complex(b)


def spectral_model(p: ModuliPoint) -> SpectralModel:
    values = ([p.R] if p.family is Family.ODD else []) + list(p.lambdas)
    pairs = []
    for v in values:
        a, b = inverse_joukowski(v)
        if abs(abs(a) - 1.0) <= UNIT_TOL:
            raise SpectralError("UNIT_MODULUS", f"branch value {v} lies over the unit circle")
        pairs.append((a, b))
    pts = [0j] + [x for pair in pairs for x in pair]
    genus = 2 * p.n + 1 if p.family is Family.ODD else 2 * p.n
    return SpectralModel(tuple(pts), genus, True, tuple(pairs))


@dataclass(frozen=True)
class QuotientImage:
    z: complex
    w_plus: complex
    w_minus: complex
    residual_plus: float
    residual_minus: float


def quotient_map_check(p: ModuliPoint, x: complex, y: complex, tol: float = 1e-10) -> QuotientImage:
    """Push a point of X down to both quotient curves and check the images."""
    model = spectral_model(p)
    x = complex(x)
    y = complex(y)
    target = complex(model.poly(x))
    if abs(y * y - target) > tol * max(1.0, abs(target)):
        raise SpectralError("OFF_CURVE", f"|y^2 - P(x)| = {abs(y * y - target):.3e}")
    z = x + 1.0 / x
    if p.family is Family.ODD:
        wp = y / x ** (p.n + 1)
        wm = (x + 1.0) * (x - 1.0) * y / x ** (p.n + 2)
    else:
        wp = (x + 1.0) * y / x ** (p.n + 1)
        wm = (x - 1.0) * y / x ** (p.n + 1)
    plus, minus = quotient_curves(p.base())
    return QuotientImage(z, wp, wm, plus.on_curve_residual(z, wp), minus.on_curve_residual(z, wm))


def branch_separation(points: Iterable[complex]) -> float:
    pts = list(points)
    best = math.inf
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            best = min(best, abs(pts[i] - pts[j]))
    return best
