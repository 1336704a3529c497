"""Singular-integral quadrature for semigroup-based fractional calculus.

Two integral families are computed here, both on dyadic Gauss-Legendre
panels with analytic end corrections:

* the Balakrishnan integral  int_0^inf tau^{-s-1}(e^{-w tau} - 1) dtau,
  whose value is -Gamma(1-s)/s * w^s for Re w >= 0 (principal branch);
* the Bessel-type heat-time integral  int_0^inf tau^(p-1) e^{-beta/tau}
  e^{-gamma tau} dtau, the per-mode building block of the extension
  Poisson kernel.

Near tau = 0 the first integrand is handled by an analytic power series,
the second by its Gaussian cutoff e^{-beta/tau}.  The far tail is the
analytic -tau_max^{-s}/s piece (for the constant part) plus an
integration-by-parts asymptotic series for the exponential part whose
remainder is bounded without any oscillation credit, so purely imaginary
exponents (time-frequency modes) are covered.  Per-panel Gauss order
grows with the largest imaginary part the scheme must resolve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class QuadratureToleranceError(RuntimeError):
    """Raised when self-consistent refinement cannot meet the tolerance."""

    def __init__(self, achieved: float, tol: float):
        super().__init__(f"quadrature error {achieved:.3e} exceeds tolerance {tol:.3e}")
        self.achieved = achieved
        self.tol = tol


@lru_cache(maxsize=512)
def _gauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def _pochhammer(a: float, j: int) -> float:
    out = 1.0
    for k in range(j):
        out *= a + k
    return out


def dyadic_bounds(t0: float, tmax: float) -> np.ndarray:
    if not 0 < t0 < tmax:
        raise ValueError("need 0 < t0 < tmax")
    bounds = [t0]
    while bounds[-1] < tmax:
        bounds.append(min(bounds[-1] * 2.0, tmax))
    return np.asarray(bounds)


@dataclass(frozen=True)
class QuadratureScheme:
    """Dyadic panel family plus end-correction orders.

    Fields
    ------
    t0, tmax : float
        Panel range; the near-zero treatment covers (0, t0], the tail
        corrections cover [tmax, inf).
    base_order : int
        Gauss-Legendre order floor per panel.
    im_max : float
        Largest |Im w| the panels must resolve; per-panel order grows as
        0.6 * im_max * width on top of the floor.
    series_terms, tail_terms : int
        Orders of the near-zero power series and of the integration-by-
        parts tail series.
    """

    t0: float
    tmax: float
    base_order: int = 16
    im_max: float = 0.0
    series_terms: int = 6
    tail_terms: int = 10

    def panel_nodes(self):
        bounds = dyadic_bounds(self.t0, self.tmax)
        nodes, weights = [], []
        for a, b in zip(bounds[:-1], bounds[1:]):
            order = self.base_order + int(math.ceil(0.6 * self.im_max * (b - a)))
            x, w = _gauss(order)
            nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
            weights.append(0.5 * (b - a) * w)
        return np.concatenate(nodes), np.concatenate(weights)

    @property
    def panel_count(self) -> int:
        return len(dyadic_bounds(self.t0, self.tmax)) - 1

    def refined(self) -> "QuadratureScheme":
        """Strictly finer scheme: more panels, higher orders, longer series."""
        return QuadratureScheme(t0=self.t0 / 4.0, tmax=self.tmax * 2.0,
                                base_order=self.base_order + 8,
                                im_max=self.im_max,
                                series_terms=self.series_terms + 2,
                                tail_terms=self.tail_terms + 2)

    def digest(self) -> str:
        return (f"t0={self.t0:.3e};tmax={self.tmax:.3e};base={self.base_order};"
                f"im={self.im_max:.3e};ser={self.series_terms};tail={self.tail_terms}")


def balakrishnan_scheme(w_values: np.ndarray, base_order: int = 16) -> QuadratureScheme:
    """Scheme sized for the Balakrishnan integral over the given symbols.

    tau_max is pushed to 40 / min nonzero |w| so the tail series converges
    for every mode (remainder <= poch(s+1,J)/(|w| tau_max)^J without using
    oscillation), and panel orders track the largest time frequency.
    """
    w = np.atleast_1d(np.asarray(w_values, dtype=complex)).ravel()
    aw = np.abs(w)
    nz = aw > 0
    if not nz.any():
        raise ValueError("need at least one nonzero symbol")
    wmin = float(aw[nz].min())
    wmax = float(aw.max())
    t0 = min(1e-4, 0.02 / max(wmax, 1.0))
    tmax = max(32.0, 40.0 / wmin)
    return QuadratureScheme(t0=t0, tmax=tmax, base_order=base_order,
                            im_max=float(np.abs(w.imag).max()))


def _tail_gamma_like(p_minus_m: float, gammas: np.ndarray, tmax: float, J: int) -> np.ndarray:
    """int_tmax^inf t^(q-1) e^{-g t} dt with q = p_minus_m, via parts series.

    For g = 0 the closed form t_max^q / (-q) requires q < 0.
    """
    g = np.atleast_1d(np.asarray(gammas, dtype=complex))
    out = np.zeros(g.shape, dtype=complex)
    zero = g == 0
    if zero.any():
        if p_minus_m >= 0:
            raise ValueError("divergent tail: zero exponent with nonnegative power")
        out[zero] = tmax ** p_minus_m / (-p_minus_m)
    nz = ~zero
    if nz.any():
        acc = np.zeros(g[nz].shape, dtype=complex)
        for j in range(J):
            acc += ((-1) ** j * _pochhammer(1.0 - p_minus_m, j)
                    * tmax ** (p_minus_m - 1.0 - j) / g[nz] ** (j + 1))
        with np.errstate(under="ignore"):
            out[nz] = np.exp(-g[nz] * tmax) * acc
    return out


def balakrishnan_multiplier(w_values: np.ndarray, s: float,
                            scheme: QuadratureScheme) -> np.ndarray:
    """Quadrature of -s/Gamma(1-s) int_0^inf tau^{-s-1}(e^{-w tau}-1) dtau.

    Exact value is w^s on the principal branch; w = 0 maps to 0 exactly.
    The semigroup factor e^{-w tau} enters only through direct evaluation
    at quadrature nodes, so this path is independent of the spectral
    multiplier it is checked against.
    """
    if not 0 < s < 1:
        raise ValueError("fractional order s must lie in (0, 1)")
    w = np.asarray(w_values, dtype=complex)
    shape = w.shape
    w = w.ravel()
    tq, wq = scheme.panel_nodes()
    kernel = wq * tq ** (-s - 1.0)
    with np.errstate(under="ignore"):
        E = np.exp(-np.outer(w, tq))
    integral = (E - 1.0) @ kernel

    # (0, t0]: sum_{m>=1} (-w)^m/m! * t0^{m-s}/(m-s)
    t0 = scheme.t0
    term = np.ones_like(w)
    fact = 1.0
    for m in range(1, scheme.series_terms + 1):
        term = term * (-w)
        fact *= m
        integral += term / fact * t0 ** (m - s) / (m - s)

    # [tmax, inf): analytic constant part plus exponential parts series
    tmax = scheme.tmax
    integral += -(tmax ** (-s)) / s
    nz = w != 0
    acc = np.zeros_like(w[nz])
    for j in range(scheme.tail_terms):
        acc += ((-1) ** j * _pochhammer(s + 1.0, j)
                * tmax ** (-s - 1.0 - j) / w[nz] ** (j + 1))
    with np.errstate(under="ignore"):
        integral[nz] += np.exp(-w[nz] * tmax) * acc

    out = -(s / math.gamma(1.0 - s)) * integral
    out[~nz] = 0.0
    return out.reshape(shape)


def balakrishnan_error_bound(w_values: np.ndarray, s: float,
                             scheme: QuadratureScheme) -> float:
    """A priori bound on the analytic end-correction errors (panel error
    excluded; panels are self-checked by refinement).  Monotone decreasing
    under scheme refinement.
    """
    w = np.atleast_1d(np.asarray(w_values, dtype=complex)).ravel()
    aw = np.abs(w[w != 0])
    if aw.size == 0:
        return 0.0
    M = scheme.series_terms
    series = (aw.max() * scheme.t0) ** (M + 1) / math.factorial(M + 1) \
        * scheme.t0 ** (-s) / (M + 1 - s)
    J = scheme.tail_terms
    x = aw.min() * scheme.tmax
    tail = _pochhammer(s + 1.0, J) / x ** J * scheme.tmax ** (-s) / (s + J)
    return float((s / math.gamma(1.0 - s)) * (series + tail))


def checked_balakrishnan_multiplier(w_values: np.ndarray, s: float,
                                    scheme: QuadratureScheme, rtol: float,
                                    max_refinements: int = 2) -> tuple:
    """Multiplier plus a self-consistent error estimate.

    The estimate compares the scheme against its refinement; refinement
    repeats until the relative disagreement is below `rtol` or the budget
    is exhausted, in which case QuadratureToleranceError carries the
    achieved error.
    """
    current = scheme
    coarse = balakrishnan_multiplier(w_values, s, current)
    for _ in range(max_refinements + 1):
        finer = current.refined()
        fine = balakrishnan_multiplier(w_values, s, finer)
        scale = max(np.abs(fine).max(), 1e-300)
        err = float(np.abs(fine - coarse).max() / scale)
        if err <= rtol:
            return fine, err
        current, coarse = finer, fine
    raise QuadratureToleranceError(err, rtol)


# ---------------------------------------------------------------------------
# Bessel-type heat-time integrals
# ---------------------------------------------------------------------------

def heat_time_scheme(p: float, betas: np.ndarray, gammas: np.ndarray,
                     base_order: int = 16) -> QuadratureScheme:
    """Scheme for int t^{p-1} e^{-beta/t - gamma t} dt over a (beta, gamma)
    batch: panels start where the smallest Gaussian cutoff dies
    (beta_min / 45) and run to where the tail series is uniformly valid.
    """
    b = np.atleast_1d(np.asarray(betas, dtype=float))
    g = np.atleast_1d(np.asarray(gammas, dtype=complex))
    ag = np.abs(g)
    gmin = float(ag[ag > 0].min()) if (ag > 0).any() else None
    bpos = b[b > 0]
    if bpos.size:
        t0 = float(bpos.min()) / 45.0
    else:
        t0 = min(1e-4, 0.02 / max(ag.max(), 1.0))
    tmax = 40.0
    if gmin is not None:
        tmax = max(tmax, 40.0 / gmin)
    if b.max() > 0:
        tmax = max(tmax, 20.0 * float(b.max()))
    if (ag == 0).any() and p >= 0:
        raise ValueError("gamma = 0 requires p < 0 for convergence")
    return QuadratureScheme(t0=min(t0, tmax / 16.0), tmax=tmax, base_order=base_order,
                            im_max=float(np.abs(g.imag).max()))


def heat_time_integral(p: float, betas: np.ndarray, gammas: np.ndarray,
                       scheme: QuadratureScheme, taylor_terms: int = 6) -> np.ndarray:
    """int_0^inf t^{p-1} e^{-beta/t} e^{-gamma t} dt on a (beta x gamma) grid.

    Evaluated as one complex matrix product over the shared panel nodes;
    the [tmax, inf) tail expands e^{-beta/t} in Taylor series (valid since
    beta/tmax <= 1/20 by scheme construction) with each term integrated by
    the parts series of `_tail_gamma_like`.  The (0, t0] stub is below the
    Gaussian cutoff (or the integrand is regular there when beta = 0 and
    p < 0) and is dropped; its relative size is O(45^{-p} e^{-45}).

    The derivative of the Poisson kernel in z needs the same integral at
    p - 1 (chain rule through beta = z^2/4), so no separate path exists.
    """
    b = np.atleast_1d(np.asarray(betas, dtype=float))
    g = np.atleast_1d(np.asarray(gammas, dtype=complex))
    tq, wq = scheme.panel_nodes()
    kernel = wq * tq ** (p - 1.0)
    with np.errstate(under="ignore"):
        Eb = np.exp(-b[:, None] / tq[None, :]) * kernel[None, :]
        Eg = np.exp(-np.outer(g, tq))
    out = Eb @ Eg.T  # (B, Q) @ (Q, G)

    # (0, t0] stub: Gaussian-suppressed when beta > 0; analytic series
    # sum_m (-g)^m/m! t0^{p+m}/(p+m) on beta = 0 rows (needs p > 0 there)
    zero_b = b == 0.0
    if zero_b.any():
        if p <= 0:
            raise ValueError("beta = 0 requires p > 0 for convergence at 0")
        t0 = scheme.t0
        stub = np.zeros(g.shape, dtype=complex)
        term = np.ones(g.shape, dtype=complex)
        fact = 1.0
        for m in range(scheme.series_terms + 1):
            if m > 0:
                term = term * (-g)
                fact *= m
            stub += term / fact * t0 ** (p + m) / (p + m)
        out[zero_b] += stub[None, :]

    tmax = scheme.tmax
    for m in range(taylor_terms + 1):
        coef = (-b) ** m / math.factorial(m)
        Gm = _tail_gamma_like(p - m, g, tmax, scheme.tail_terms)
        out += np.outer(coef, Gm)
    return out
