"""Special-function evaluators and the closed-form identity battery.

The modified Bessel K_nu evaluator integrates e^{-x cosh u} cosh(nu u) on
unit-width Gauss panels with a doubling cutoff; it is deliberately
independent of the heat-time quadrature so the Gradshteyn-Ryzhik-style
identity check compares two different integral representations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import QuadratureScheme, _gauss, heat_time_integral, heat_time_scheme

gamma_fn = math.gamma


def bessel_k(nu: float, x, tol: float = 1e-14, max_panels: int = 60) -> np.ndarray:
    """Modified Bessel function of the second kind, real order.

    K_nu(x) = int_0^inf e^{-x cosh u} cosh(nu u) du, x > 0, by unit-width
    Gauss-Legendre panels appended until a panel contributes less than
    `tol` relative to the running total.  Even in nu, so K_nu = K_{-nu}
    holds exactly by construction.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if (xs <= 0).any():
        raise ValueError("bessel_k needs x > 0")
    nodes, weights = _gauss(24)
    total = np.zeros_like(xs)
    for panel in range(max_panels):
        u = 0.5 * (nodes + 1.0) + panel
        w = 0.5 * weights
        with np.errstate(under="ignore", over="ignore"):
            vals = (np.exp(-np.outer(xs, np.cosh(u))) * np.cosh(nu * u)[None, :]) @ w
        total += vals
        if np.all(vals <= tol * np.maximum(total, 1e-300)):
            break
    else:
        raise RuntimeError("bessel_k did not converge within the panel budget")
    return total if np.ndim(x) else float(total[0])


@dataclass(frozen=True)
class IdentityRow:
    name: str
    params: tuple
    defect: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.defect <= self.tolerance


def gr_bessel_identity_defect(nu: float, beta: float, gamma: float) -> float:
    """Relative defect of int t^{nu-1} e^{-beta/t - gamma t} dt
    against 2 (beta/gamma)^{nu/2} K_nu(2 sqrt(beta gamma)), computed by
    two independent quadratures.
    """
    scheme = heat_time_scheme(nu, [beta], [gamma])
    lhs = heat_time_integral(nu, [beta], [gamma], scheme)[0, 0].real
    rhs = 2.0 * (beta / gamma) ** (nu / 2.0) * bessel_k(nu, 2.0 * math.sqrt(beta * gamma))
    return abs(lhs - rhs) / abs(rhs)


def gamma_integral_defect(s: float) -> float:
    """Relative defect of int_0^inf t^{-s-1}(1 - e^{-t}) dt = Gamma(1-s)/s."""
    from .quadrature import balakrishnan_multiplier, balakrishnan_scheme
    scheme = balakrishnan_scheme(np.array([1.0]))
    m = balakrishnan_multiplier(np.array([1.0 + 0j]), s, scheme)[0]
    # multiplier at w = 1 is -s/Gamma(1-s) * (-Gamma(1-s)/s) = 1
    return abs(m.real - 1.0)


def neumann_theta_identity_defect(a: float) -> float:
    """Defect of (1/Gamma((1+a)/2)) int theta^{-(1-a)/2} e^{-theta} dtheta = 1."""
    p = (1.0 + a) / 2.0
    scheme = heat_time_scheme(p, [0.0], [1.0])
    val = heat_time_integral(p, [0.0], [1.0], scheme)[0, 0].real
    return abs(val / gamma_fn(p) - 1.0)


def bessel_tail_integral(a: float, lam: float, extent: float, n_points: int = 400) -> float:
    """int_0^{extent sqrt(lam)} K_{(1-a)/2}(rho)^2 rho^a drho.

    Finite only for a > 0 (the small-argument asymptotics K_nu ~ rho^{-nu}
    make the integrand rho^{2a-1} near zero); callers probing boundedness
    in lambda should stay in that range.
    """
    if a <= 0:
        raise ValueError("integral diverges at rho = 0 for a <= 0")
    upper = extent * math.sqrt(lam)
    nu = (1.0 - a) / 2.0
    # graded panels toward the rho^{2a-1} end
    bounds = np.geomspace(min(1e-6, upper / 16), upper, 48)
    nodes, weights = _gauss(20)
    total = 0.0
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        r = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
        w = 0.5 * (hi - lo) * weights
        total += float((bessel_k(nu, r) ** 2 * r ** a) @ w)
    # stub (0, bounds[0]]: integrand ~ C rho^{2a-1}
    c0 = (0.5 * gamma_fn(nu) * 2.0 ** nu) ** 2
    total += c0 * bounds[0] ** (2 * a) / (2 * a)
    return total


def special_identities_check(s_values=(0.25, 0.5, 0.75),
                             z_values=(0.1, 1.0, 10.0),
                             nu_values=(0.25, 0.5, 0.75),
                             bg_values=(0.5, 1.0, 2.0),
                             tolerance: float = 1e-8) -> list:
    """Run the closed-form identity battery; returns IdentityRow records.

    Covers: the Poisson-kernel normalization at every (z, a); the scalar
    Gamma integral behind the Balakrishnan formula; the Bessel-K integral
    identity on a (nu, beta, gamma) grid; K_nu symmetry in nu; the
    K_{1/2} closed form; and boundedness in lambda of the weighted K^2
    tail integral on its convergent range a > 0.
    """
    from .extension import poisson_mode

    rows = []
    for s in s_values:
        a = 1.0 - 2.0 * s
        for z in z_values:
            d = abs(poisson_mode(a, z, 0.0, 0.0) - 1.0)
            rows.append(IdentityRow("poisson_normalization", (("a", a), ("z", z)), d, tolerance))
    for s in s_values:
        rows.append(IdentityRow("gamma_integral", (("s", s),), gamma_integral_defect(s), tolerance))
    for nu in nu_values:
        for beta in bg_values:
            for gm in bg_values:
                d = gr_bessel_identity_defect(nu, beta, gm)
                rows.append(IdentityRow("gr_bessel", (("nu", nu), ("beta", beta), ("gamma", gm)),
                                        d, tolerance))
    for nu in (0.3,):
        for x in (0.5, 1.0, 5.0):
            d = abs(bessel_k(nu, x) - bessel_k(-nu, x))
            rows.append(IdentityRow("k_symmetry", (("nu", nu), ("x", x)), d, 1e-10))
    closed = math.sqrt(math.pi / 2.0) * math.exp(-1.0)
    rows.append(IdentityRow("k_half_closed_form", (("x", 1.0),),
                            abs(bessel_k(0.5, 1.0) - closed), tolerance))
    for s in s_values:
        rows.append(IdentityRow("neumann_theta", (("a", 1 - 2 * s),),
                                neumann_theta_identity_defect(1 - 2 * s), tolerance))
    # K^2 tail boundedness, convergent range a > 0 only (s < 1/2)
    for a in (0.25, 0.5):
        vals = [bessel_tail_integral(a, lam, extent=2.0) for lam in (1.0, 4.0, 16.0, 64.0)]
        monotone = all(v2 >= v1 - 1e-12 for v1, v2 in zip(vals, vals[1:]))
        spread = (vals[-1] - vals[0]) / vals[-1]
        defect = 0.0 if monotone else 1.0
        rows.append(IdentityRow("k2_tail_bounded", (("a", a), ("spread", round(spread, 6))),
                                defect, 0.5))
    return rows
