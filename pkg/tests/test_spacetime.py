import numpy as np
import pytest

from fracheat.generator import heat_apply
from fracheat.spacetime import (SpaceTimeField, TimeCircle, evolutive_apply,
                                from_spatial, st_norm, time_shift)


def test_time_circle_validation():
    with pytest.raises(ValueError):
        TimeCircle(period=1.0, samples=12)
    with pytest.raises(ValueError):
        TimeCircle(period=-1.0, samples=16)
    c = TimeCircle(period=2.0, samples=8)
    assert c.dt == 0.25
    assert np.allclose(np.sort(c.frequencies), np.arange(-4, 4) / 2.0)


def test_fourier_cache_roundtrip(circle16, dec_e2):
    rng = np.random.default_rng(5)
    f = SpaceTimeField(values=rng.standard_normal((dec_e2.n, 16)), circle=circle16)
    assert f.roundtrip_defect() <= 1e-12
    assert f.conjugate_symmetry_defect() <= 1e-10


def test_evolutive_reduces_to_heat_on_time_independent(dec_e2, circle16):
    rng = np.random.default_rng(1)
    v = rng.standard_normal(dec_e2.n)
    U = from_spatial(v, circle16)
    W = evolutive_apply(dec_e2, 0.7, U)
    expected = heat_apply(dec_e2, 0.7, v)
    assert np.abs(W.values - expected[:, None]).max() <= 1e-12


def test_evolutive_contraction_and_identity(dec_e2, circle16):
    rng = np.random.default_rng(2)
    U = SpaceTimeField(values=rng.standard_normal((dec_e2.n, 16)), circle=circle16)
    n0 = st_norm(U, dec_e2.grid.cell_volume)
    assert np.array_equal(evolutive_apply(dec_e2, 0.0, U).values, U.values)
    for tau in (0.1, 1.0):
        assert st_norm(evolutive_apply(dec_e2, tau, U), dec_e2.grid.cell_volume) <= n0 * (1 + 1e-12)
    with pytest.raises(ValueError):
        evolutive_apply(dec_e2, -0.5, U)


def test_evolutive_commutes_with_time_shift(dec_e2, circle16):
    rng = np.random.default_rng(3)
    U = SpaceTimeField(values=rng.standard_normal((dec_e2.n, 16)), circle=circle16)
    a = evolutive_apply(dec_e2, 0.3, time_shift(U, 5))
    b = time_shift(evolutive_apply(dec_e2, 0.3, U), 5)
    assert np.abs(a.values - b.values).max() <= 1e-12


def test_field_shape_validation(circle16):
    with pytest.raises(ValueError):
        SpaceTimeField(values=np.zeros((4, 5)), circle=circle16)
