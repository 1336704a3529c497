import math

import numpy as np
import pytest
import scipy.special

from fracheat.specialfuncs import (bessel_k, bessel_tail_integral,
                                   gamma_integral_defect,
                                   gr_bessel_identity_defect,
                                   neumann_theta_identity_defect,
                                   special_identities_check)


def test_bessel_k_half_closed_form():
    # K_{1/2}(x) = sqrt(pi/(2x)) e^{-x}
    assert abs(bessel_k(0.5, 1.0) - math.sqrt(math.pi / 2.0) * math.exp(-1.0)) <= 1e-12
    assert abs(bessel_k(0.5, 1.0) - 0.4610685044) <= 1e-9


def test_bessel_k_against_scipy_oracle():
    xs = np.array([0.3, 0.5, 1.0, 2.0, 5.0, 10.0])
    for nu in (0.1, 0.25, 0.5, 0.75, 0.9):
        mine = bessel_k(nu, xs)
        ref = scipy.special.kv(nu, xs)
        assert np.abs(mine - ref).max() <= 1e-12 * np.abs(ref).max() + 1e-14


def test_bessel_k_symmetry():
    for nu in (0.3, 0.7):
        for x in (0.5, 1.0, 5.0):
            assert abs(bessel_k(nu, x) - bessel_k(-nu, x)) <= 1e-10


def test_bessel_k_rejects_nonpositive_argument():
    with pytest.raises(ValueError):
        bessel_k(0.5, 0.0)


@pytest.mark.parametrize("nu", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
def test_gr_bessel_identity(nu, beta, gamma):
    assert gr_bessel_identity_defect(nu, beta, gamma) <= 1e-8


def test_gr_identity_nu_half_cross_check():
    # nu = 1/2, beta = gamma = 1: both quadratures meet the closed form
    # 2 K_{1/2}(2) = sqrt(pi/2) e^{-2} * 2
    lhs = 2.0 * bessel_k(0.5, 2.0)
    closed = 2.0 * math.sqrt(math.pi / 4.0) * math.exp(-2.0)
    assert abs(lhs - closed) <= 1e-10
    assert gr_bessel_identity_defect(0.5, 1.0, 1.0) <= 1e-8


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_gamma_integral(s):
    assert gamma_integral_defect(s) <= 1e-8


@pytest.mark.parametrize("a", [-0.5, 0.0, 0.5])
def test_neumann_theta_identity(a):
    assert neumann_theta_identity_defect(a) <= 1e-8


def test_k2_tail_bounded_in_lambda():
    vals = [bessel_tail_integral(0.5, lam, extent=2.0) for lam in (1.0, 4.0, 16.0, 64.0)]
    assert all(v2 >= v1 - 1e-12 for v1, v2 in zip(vals, vals[1:]))
    # bounded: the increments shrink as the integrand tail dies
    assert vals[-1] - vals[-2] < 0.05 * vals[-1]
    with pytest.raises(ValueError):
        bessel_tail_integral(-0.25, 1.0, extent=2.0)


def test_identity_battery_all_pass():
    rows = special_identities_check()
    failures = [r for r in rows if not r.passed]
    assert failures == []
