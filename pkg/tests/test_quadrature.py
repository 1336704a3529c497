import math

import numpy as np
import pytest
import scipy.integrate

from fracheat.quadrature import (QuadratureScheme, QuadratureToleranceError,
                                 balakrishnan_error_bound,
                                 balakrishnan_multiplier, balakrishnan_scheme,
                                 checked_balakrishnan_multiplier, dyadic_bounds,
                                 heat_time_integral, heat_time_scheme)


def test_dyadic_bounds_cover():
    b = dyadic_bounds(1e-4, 32.0)
    assert b[0] == 1e-4 and b[-1] == 32.0
    assert np.all(np.diff(b) > 0)


def test_scheme_refinement_monotone():
    s = QuadratureScheme(t0=1e-4, tmax=32.0)
    r = s.refined()
    assert r.panel_count > s.panel_count
    w = np.array([1.0, 10.0, 100.0])
    assert balakrishnan_error_bound(w, 0.5, r) < balakrishnan_error_bound(w, 0.5, s)


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_balakrishnan_matches_principal_power(s):
    lam = np.concatenate([[0.0], np.geomspace(0.7, 420.0, 25)])
    sig = np.fft.fftfreq(16, 1.0 / 16)
    W = (lam[:, None] + 2j * np.pi * sig[None, :]).ravel()
    scheme = balakrishnan_scheme(W)
    m = balakrishnan_multiplier(W, s, scheme)
    nz = W != 0
    rel = np.abs(m[nz] - W[nz] ** s) / np.abs(W[nz] ** s)
    assert rel.max() <= 1e-9
    assert np.all(m[~nz] == 0.0)


def test_gamma_integral_scalar_self_test():
    # int_0^inf t^{-s-1}(1 - e^{-t}) dt = Gamma(1-s)/s; at s = 1/2 the
    # value is 2 sqrt(pi) since Gamma(1/2) = sqrt(pi)
    s = 0.5
    scheme = balakrishnan_scheme(np.array([1.0]))
    tq, wq = scheme.panel_nodes()
    val = ((1.0 - np.exp(-tq)) * tq ** (-s - 1.0)) @ wq
    # add the analytic pieces: series on (0, t0], tail on [tmax, inf)
    m = balakrishnan_multiplier(np.array([1.0 + 0j]), s, scheme)[0]
    integral = -m.real * math.gamma(1.0 - s) / s * (-1.0)  # multiplier 1 <-> integral
    assert abs(m.real - 1.0) <= 1e-10
    assert abs(2.0 * math.sqrt(math.pi) - math.gamma(0.5) / 0.5) == 0.0


def test_checked_multiplier_and_tolerance_error():
    W = np.array([1.0 + 2j * np.pi])
    scheme = balakrishnan_scheme(W)
    vals, err = checked_balakrishnan_multiplier(W, 0.5, scheme, rtol=1e-8)
    assert err <= 1e-8
    assert abs(vals[0] - W[0] ** 0.5) <= 1e-8
    with pytest.raises(QuadratureToleranceError) as exc:
        checked_balakrishnan_multiplier(W, 0.5, scheme, rtol=1e-17, max_refinements=0)
    assert exc.value.achieved > 1e-17


@pytest.mark.parametrize("p,beta,gamma", [(-0.5, 0.25, 1.0), (-0.25, 1.0, 3.0),
                                          (0.5, 0.5, 0.5), (0.75, 2.0, 2.0)])
def test_heat_time_integral_vs_adaptive_quadrature(p, beta, gamma):
    scheme = heat_time_scheme(p, [beta], [gamma])
    val = heat_time_integral(p, [beta], [gamma], scheme)[0, 0].real
    oracle, _ = scipy.integrate.quad(
        lambda t: t ** (p - 1.0) * math.exp(-beta / t - gamma * t), 0, np.inf,
        limit=400)
    assert abs(val - oracle) / abs(oracle) <= 1e-8


def test_heat_time_integral_oscillatory_mode():
    # purely imaginary exponent: QUADPACK oscillatory-weight quadrature on
    # the infinite range is the independent oracle
    p, beta = -0.5, 0.25
    g = 2j * np.pi
    scheme = heat_time_scheme(p, [beta], [g])
    val = heat_time_integral(p, [beta], [g], scheme)[0, 0]
    def f(t):
        return t ** (p - 1) * math.exp(-beta / t) if t > 0 else 0.0

    re, _ = scipy.integrate.quad(f, 0, np.inf, weight="cos", wvar=2 * math.pi,
                                 limit=400)
    im, _ = scipy.integrate.quad(f, 0, np.inf, weight="sin", wvar=2 * math.pi,
                                 limit=400)
    assert abs(val - (re - 1j * im)) <= 1e-8


def test_heat_time_scheme_guards():
    with pytest.raises(ValueError):
        heat_time_scheme(0.5, [0.0], [0.0])  # divergent at infinity
    with pytest.raises(ValueError):
        heat_time_integral(-0.5, [0.0], [1.0],
                           heat_time_scheme(-0.5, [1.0], [1.0]))  # divergent at 0
