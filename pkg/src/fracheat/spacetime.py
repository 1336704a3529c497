"""Space-time fields on grid x periodic time circle with a Fourier cache.

Time-frequency convention: hat f(sigma) = int e^{-2 pi i sigma t} f(t) dt
with signed discrete frequencies sigma_j = j / T.  Per (eigenmode, time
mode) the evolutive semigroup is multiplication by
e^{-2 pi i sigma tau} e^{-lambda tau}, an exact identity mode by mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .generator import SpectralDecomposition


@dataclass(frozen=True)
class TimeCircle:
    """Periodic time axis: N_t samples (a power of two) on [0, T)."""

    period: float
    samples: int

    def __post_init__(self):
        if self.period <= 0:
            raise ValueError("period must be positive")
        n = int(self.samples)
        if n < 2 or n & (n - 1):
            raise ValueError("sample count must be a power of two, >= 2")
        object.__setattr__(self, "samples", n)

    @property
    def dt(self) -> float:
        return self.period / self.samples

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.samples) * self.dt

    @property
    def frequencies(self) -> np.ndarray:
        """Signed sigma_j = j / T in FFT ordering."""
        return np.fft.fftfreq(self.samples, d=self.dt)


@dataclass(frozen=True)
class SpaceTimeField:
    """Real field over nodes x time circle, with cached time-Fourier modes."""

    values: np.ndarray
    circle: TimeCircle
    modes: np.ndarray = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[1] != self.circle.samples:
            raise ValueError("values must have shape (nodes, N_t)")
        v = v.copy(); v.flags.writeable = False
        m = np.fft.fft(v, axis=1)
        m.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "modes", m)

    @property
    def n_nodes(self) -> int:
        return int(self.values.shape[0])

    def roundtrip_defect(self) -> float:
        back = np.fft.ifft(self.modes, axis=1)
        return float(np.abs(back - self.values).max())

    def conjugate_symmetry_defect(self) -> float:
        m = self.modes
        mirrored = np.conj(np.roll(m[:, ::-1], 1, axis=1))
        return float(np.abs(m - mirrored).max())


def from_spatial(u: np.ndarray, circle: TimeCircle) -> SpaceTimeField:
    """Broadcast a time-independent field onto the circle."""
    u = np.asarray(u, dtype=float).reshape(-1)
    return SpaceTimeField(values=np.repeat(u[:, None], circle.samples, axis=1),
                          circle=circle)


def eigen_time_modes(dec: SpectralDecomposition, field: SpaceTimeField) -> np.ndarray:
    """Coefficients over (eigenmode k, time frequency j)."""
    return dec.eigenvectors.T @ field.modes


def from_eigen_time_modes(dec: SpectralDecomposition, modes: np.ndarray,
                          circle: TimeCircle) -> SpaceTimeField:
    values = dec.eigenvectors @ np.fft.ifft(modes, axis=1)
    return SpaceTimeField(values=values.real, circle=circle)


def mode_symbols(dec: SpectralDecomposition, circle: TimeCircle) -> np.ndarray:
    """Complex array w_{kj} = lambda_k + 2 pi i sigma_j."""
    lam = dec.eigenvalues
    sig = circle.frequencies
    return lam[:, None] + 2j * np.pi * sig[None, :]


def evolutive_apply(dec: SpectralDecomposition, tau: float,
                    field: SpaceTimeField) -> SpaceTimeField:
    """Evolutive semigroup: heat flow for time tau combined with the time
    shift t -> t - tau, applied per mode; contractive in the L2 norm.
    """
    if tau < 0:
        raise ValueError("evolutive semigroup needs tau >= 0")
    if tau == 0:
        return SpaceTimeField(values=field.values.copy(), circle=field.circle)
    w = mode_symbols(dec, field.circle)
    m = eigen_time_modes(dec, field) * np.exp(-w * tau)
    return from_eigen_time_modes(dec, m, field.circle)


def time_shift(field: SpaceTimeField, steps: int) -> SpaceTimeField:
    """Shift the field by an integer number of samples on the circle."""
    return SpaceTimeField(values=np.roll(field.values, steps, axis=1),
                          circle=field.circle)


def st_norm(field: SpaceTimeField, cell_volume: float) -> float:
    """Discrete L2 norm over grid x circle."""
    return float(np.sqrt((field.values ** 2).sum() * cell_volume * field.circle.dt))
