"""Independent reference computations used only by the tests.

None of these call the package quadrature or fibre continuation.
"""

import math

import numpy as np
from scipy import integrate as sint


def trapezoid_cycle(numerator, branch_points, path, w0, levels: int = 6, base: int = 64) -> complex:
    """Uniform-refinement trapezoid rule on every segment plus Romberg extrapolation.

    w is carried along by picking, at each sample, the square root closest to
    the previous value.
    """
    pts = np.asarray(branch_points, dtype=complex)
    coeffs = np.asarray(numerator, dtype=complex)

    def run(m):
        total = 0j
        w_prev = complex(w0)
        for seg in path.segments:
            s = np.linspace(0.0, 1.0, m + 1)
            z = seg.point(s)
            dz = seg.velocity(s)
            P = np.prod(z[:, None] - pts[None, :], axis=1) if len(pts) else np.ones_like(z)
            root = np.sqrt(P)
            w = np.empty_like(root)
            for k in range(len(z)):
                r = root[k]
                w[k] = r if abs(r - w_prev) <= abs(r + w_prev) else -r
                w_prev = w[k]
            f = np.polynomial.polynomial.polyval(z, coeffs) * dz / w
            total += (f[0] / 2 + f[1:-1].sum() + f[-1] / 2) / m
        return total

    table = [run(base * 2 ** k) for k in range(levels)]
    for j in range(1, levels):
        table = [(4 ** j * table[k + 1] - table[k]) / (4 ** j - 1) for k in range(len(table) - 1)]
    return table[-1]


def real_line_integral(f, a: float, b: float) -> float:
    """scipy.quad with algebraic endpoint weights handled by the routine itself."""
    val, _ = sint.quad(f, a, b, limit=200, epsabs=1e-13, epsrel=1e-13)
    return val


def odd_genus_one_closed_forms(t: float) -> dict:
    """Elementary integrals for w_+^2 = z - R, R = 2 + t, with w_+/i > 0 at the start."""
    return {
        "Iplus": np.array([4 * math.sqrt(t), 4 * math.sqrt(4 + t)]),
        # (3/2) z dz / w_+ on the same paths, integrated by hand
        "IhatPlus": np.array([12 * math.sqrt(t) + 4 * t ** 1.5,
                              4 * (4 + t) ** 1.5 - 12 * (4 + t) ** 0.5]),
    }


def odd_genus_one_minus(t: float) -> dict:
    """I_- and s for w_-^2 = (z^2 - 4)(z - R) by real quadrature.

    s is fixed by the vanishing a-period around [2, R], which reduces to the
    real integral over (2, R); the b-period is twice the integral over (-2, 2).
    Both use scipy's algebraic end-point weights.
    """
    R = 2 + t
    alg = dict(weight="alg", wvar=(-0.5, -0.5), epsabs=1e-14, epsrel=1e-13, limit=200)
    m0 = sint.quad(lambda z: 1 / math.sqrt(z + 2), 2, R, **alg)[0]
    m1 = sint.quad(lambda z: z / math.sqrt(z + 2), 2, R, **alg)[0]
    z0 = m1 / m0
    b = 2 * sint.quad(lambda z: (z - z0) / math.sqrt(R - z), -2, 2, **alg)[0]
    return {"s": z0 - 2, "Iminus_abs": abs(b)}


def series_D(branch_points, zetas) -> complex:
    """D from the closed formula: half the branch sum minus the zero sum."""
    return 0.5 * complex(np.sum(branch_points)) - complex(np.sum(zetas))
