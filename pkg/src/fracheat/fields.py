"""Seeded test-field constructors shared by audits, scans, and the CLI."""

from __future__ import annotations

import numpy as np

from .generator import SpectralDecomposition
from .spacetime import SpaceTimeField, TimeCircle, from_eigen_time_modes, mode_symbols


def random_field(dec: SpectralDecomposition, seed: int, damping: float = None) -> np.ndarray:
    """Seeded random spatial field, optionally mollified by e^{-lambda/damping}.

    Mollification keeps the field in the discrete analogue of the smooth
    class the trace and energy statements assume; without it the top of
    the spectrum dominates and rate fits saturate.
    """
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(dec.n)
    if damping is not None:
        u = dec.apply_multiplier(np.exp(-dec.eigenvalues / damping), u)
    return u


def random_spacetime_field(dec: SpectralDecomposition, circle: TimeCircle, seed: int,
                           damping: float = None) -> SpaceTimeField:
    """Seeded random space-time field, mollified by e^{-|w|/damping} per mode."""
    rng = np.random.default_rng(seed)
    values = rng.standard_normal((dec.n, circle.samples))
    field = SpaceTimeField(values=values, circle=circle)
    if damping is None:
        return field
    w = np.abs(mode_symbols(dec, circle))
    modes = field.modes.copy()
    modes = (dec.eigenvectors.T @ modes) * np.exp(-w / damping)
    return from_eigen_time_modes(dec, modes, circle)


def nonnegative_field(dec: SpectralDecomposition, seed: int) -> np.ndarray:
    """Seeded nonnegative spatial field (squared Gaussians)."""
    rng = np.random.default_rng(seed)
    return rng.standard_normal(dec.n) ** 2


def nonnegative_spacetime_field(dec: SpectralDecomposition, circle: TimeCircle,
                                seed: int) -> SpaceTimeField:
    rng = np.random.default_rng(seed)
    return SpaceTimeField(values=rng.standard_normal((dec.n, circle.samples)) ** 2,
                          circle=circle)
