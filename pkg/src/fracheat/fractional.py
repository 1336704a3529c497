"""Fractional powers of the sub-Laplacian and of the heat operator.

Two routes exist for each operator and are kept deliberately independent:
the spectral route multiplies eigen/time modes by the principal-branch
power symbol, the Balakrishnan route integrates the semigroup against the
singular kernel tau^{-s-1} by quadrature.  Their agreement is the
artifact's central oracle check.

Real output for the space-time operator: the unpaired Nyquist frequency
line (even sample counts) takes the real part of its multiplier, which is
exactly the symmetrization (m(sigma) + m(-sigma))/2 of the two aliased
frequencies, so real fields map to real fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .generator import SpectralDecomposition
from .quadrature import (QuadratureScheme, balakrishnan_multiplier,
                         balakrishnan_scheme, checked_balakrishnan_multiplier)
from .spacetime import (SpaceTimeField, TimeCircle, eigen_time_modes,
                        from_eigen_time_modes, mode_symbols)

SPACE_TIME_MATRIX_CAP = 32768


@dataclass(frozen=True)
class FractionalParams:
    """Fractional order s in (0,1) and extension weight exponent a = 1-2s."""

    s: float

    def __post_init__(self):
        if not 0.0 < self.s < 1.0:
            raise ValueError("fractional order s must lie in (0, 1)")

    @property
    def a(self) -> float:
        return 1.0 - 2.0 * self.s


@dataclass(frozen=True)
class SpectralMultiplier:
    """Symbol values per mode, principal-branch convention."""

    values: np.ndarray
    kind: str  # "laplacian" or "heat"

    def conjugate_symmetry_defect(self) -> float:
        if self.kind != "heat":
            return 0.0
        v = self.values
        mirrored = np.conj(np.roll(v[:, ::-1], 1, axis=1))
        return float(np.abs(v - mirrored).max())


def laplacian_power_multiplier(dec: SpectralDecomposition, s: float) -> SpectralMultiplier:
    if not 0.0 < s <= 1.0:
        raise ValueError("s must lie in (0, 1]")
    return SpectralMultiplier(values=dec.eigenvalues ** s, kind="laplacian")


def heat_power_multiplier(dec: SpectralDecomposition, circle: TimeCircle,
                          s: float) -> SpectralMultiplier:
    """(lambda_k + 2 pi i sigma_j)^s with the Nyquist line realified."""
    if not 0.0 < s <= 1.0:
        raise ValueError("s must lie in (0, 1]")
    w = mode_symbols(dec, circle)
    m = np.zeros_like(w)
    nz = w != 0
    m[nz] = w[nz] ** s
    if circle.samples % 2 == 0:
        ny = circle.samples // 2
        m[:, ny] = m[:, ny].real
    return SpectralMultiplier(values=m, kind="heat")


def frac_laplacian_spectral(dec: SpectralDecomposition, s: float,
                            u: np.ndarray) -> np.ndarray:
    """(-L)^s u through the spectral resolution; the oracle path.

    s = 1 is admitted as the limit-consistency probe (recovers L u).
    """
    mult = laplacian_power_multiplier(dec, s)
    return dec.apply_multiplier(mult.values, np.asarray(u, dtype=float))


def frac_laplacian_balakrishnan(dec: SpectralDecomposition, s: float, u: np.ndarray,
                                scheme: QuadratureScheme = None,
                                rtol: float = None) -> np.ndarray:
    """(-L)^s u through the singular integral of (P_tau - I) u.

    With `rtol` set, the quadrature is refined until self-consistent to
    that tolerance (QuadratureToleranceError on failure).
    """
    if not 0.0 < s < 1.0:
        raise ValueError("Balakrishnan route needs s in (0, 1)")
    lam = dec.eigenvalues
    if scheme is None:
        scheme = balakrishnan_scheme(lam)
    if rtol is None:
        values = balakrishnan_multiplier(lam, s, scheme).real
    else:
        values, _ = checked_balakrishnan_multiplier(lam, s, scheme, rtol)
        values = values.real
    return dec.apply_multiplier(values, np.asarray(u, dtype=float))


def frac_heat_spectral(dec: SpectralDecomposition, s: float,
                       field: SpaceTimeField) -> SpaceTimeField:
    """H^s applied per (eigenmode, time frequency); the oracle path."""
    mult = heat_power_multiplier(dec, field.circle, s)
    modes = eigen_time_modes(dec, field) * mult.values
    return from_eigen_time_modes(dec, modes, field.circle)


def frac_heat_balakrishnan(dec: SpectralDecomposition, s: float, field: SpaceTimeField,
                           scheme: QuadratureScheme = None,
                           rtol: float = None) -> SpaceTimeField:
    """H^s u through the singular integral of (P^H_tau - I) u.

    Evaluated in mode space: the semigroup factor e^{-w tau} is sampled at
    the quadrature nodes per mode, which is the per-mode verification of
    the complex-power integral identity.
    """
    if not 0.0 < s < 1.0:
        raise ValueError("Balakrishnan route needs s in (0, 1)")
    w = mode_symbols(dec, field.circle)
    if scheme is None:
        scheme = balakrishnan_scheme(w)
    if rtol is None:
        values = balakrishnan_multiplier(w, s, scheme)
    else:
        values, _ = checked_balakrishnan_multiplier(w, s, scheme, rtol)
    if field.circle.samples % 2 == 0:
        ny = field.circle.samples // 2
        values = values.copy()
        values[:, ny] = values[:, ny].real
    modes = eigen_time_modes(dec, field) * values
    return from_eigen_time_modes(dec, modes, field.circle)


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------

def norm_w2s(dec: SpectralDecomposition, s: float, u: np.ndarray) -> float:
    """(sum_k (1 + lambda_k^s)^2 c_k^2)^{1/2}, c Parseval-normalized."""
    c = dec.project(np.asarray(u, dtype=float)) * math.sqrt(dec.grid.cell_volume)
    return float(np.sqrt((((1.0 + dec.eigenvalues ** s) * c) ** 2).sum()))


def norm_h2s(dec: SpectralDecomposition, s: float, field: SpaceTimeField) -> float:
    """(sum_{k,j} (1 + |lambda_k + 2 pi i sigma_j|^s)^2 |c_{kj}|^2)^{1/2}."""
    circle = field.circle
    c = eigen_time_modes(dec, field) * math.sqrt(
        dec.grid.cell_volume * circle.dt / circle.samples)
    w = np.abs(mode_symbols(dec, circle))
    return float(np.sqrt((((1.0 + w ** s) * np.abs(c)) ** 2).sum()))


# ---------------------------------------------------------------------------
# Matrices and sign audits
# ---------------------------------------------------------------------------

def frac_laplacian_matrix(dec: SpectralDecomposition, s: float) -> np.ndarray:
    """Dense matrix Phi diag(lambda^s) Phi^T of (-L)^s."""
    lam = dec.eigenvalues ** s
    return (dec.eigenvectors * lam) @ dec.eigenvectors.T


def heat_power_lag_blocks(dec: SpectralDecomposition, circle: TimeCircle,
                          s: float) -> np.ndarray:
    """Real lag blocks G of the space-time H^s matrix.

    G[l] is the n x n block coupling time samples t and t - l dt; the full
    matrix is the block circulant A[(x,t),(y,t')] = G[(t-t') mod N][x,y]
    and is never materialized here.
    """
    m = heat_power_multiplier(dec, circle, s).values
    g = np.fft.ifft(m, axis=1)  # (n_modes, N_t), real up to round-off
    phi = dec.eigenvectors
    nt = circle.samples
    blocks = np.empty((nt, dec.n, dec.n))
    for ell in range(nt):
        blocks[ell] = (phi * g[:, ell].real) @ phi.T
    return blocks


def heat_power_matrix(dec: SpectralDecomposition, circle: TimeCircle, s: float,
                      cap: int = SPACE_TIME_MATRIX_CAP) -> np.ndarray:
    """Full dense space-time matrix of H^s; refused above `cap` unknowns."""
    n, nt = dec.n, circle.samples
    if n * nt > cap:
        raise ValueError(f"space-time matrix of size {n * nt} exceeds cap {cap}")
    blocks = heat_power_lag_blocks(dec, circle, s)
    A = np.empty((n * nt, n * nt))
    for t in range(nt):
        for tp in range(nt):
            ell = (t - tp) % nt
            A[t::nt, tp::nt] = blocks[ell]
    return A


def laplacian_power_offdiag_max(dec: SpectralDecomposition, s: float) -> float:
    A = frac_laplacian_matrix(dec, s)
    off = A - np.diag(np.diag(A))
    return float(off.max())


def heat_power_offdiag_max(dec: SpectralDecomposition, circle: TimeCircle,
                           s: float) -> float:
    blocks = heat_power_lag_blocks(dec, circle, s)
    worst = blocks[1:].max() if circle.samples > 1 else -np.inf
    b0 = blocks[0] - np.diag(np.diag(blocks[0]))
    return float(max(worst, b0.max()))


# ---------------------------------------------------------------------------
# Nonlocal Dirichlet solvers
# ---------------------------------------------------------------------------

def dirichlet_solve_elliptic(dec: SpectralDecomposition, s: float,
                             ball_nodes: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Solve (-L)^s u = 0 on the ball with exterior data u = g >= 0.

    Dense solve in the interior unknowns; the maximum principle for the
    result rests on the sign structure of (-L)^s, which the Balakrishnan
    representation guarantees whenever L has nonpositive off-diagonals.
    """
    g = np.asarray(g, dtype=float)
    if (g < 0).any():
        raise ValueError("exterior data must be nonnegative")
    n = dec.n
    interior = np.zeros(n, dtype=bool)
    interior[np.asarray(ball_nodes, dtype=int)] = True
    if interior.all():
        raise ValueError("ball must be a strict subset of the nodes")
    A = frac_laplacian_matrix(dec, s)
    idx = np.flatnonzero(interior)
    ext = np.flatnonzero(~interior)
    rhs = -A[np.ix_(idx, ext)] @ g[ext]
    try:
        ui = scipy.linalg.solve(A[np.ix_(idx, idx)], rhs, assume_a="sym")
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - connected complements
        raise RuntimeError("singular interior block in elliptic Dirichlet solve") from exc
    u = g.copy()
    u[idx] = ui
    return u


def dirichlet_solve_parabolic(dec: SpectralDecomposition, s: float,
                              cylinder_mask: np.ndarray,
                              g: SpaceTimeField) -> SpaceTimeField:
    """Solve H^s u = 0 on the space-time cylinder with exterior data g >= 0.

    `cylinder_mask` is a boolean (nodes, N_t) array marking the interior.
    The interior block is gathered from the lag blocks of the H^s matrix,
    so the full space-time matrix is never materialized; the interior
    unknown count is capped at SPACE_TIME_MATRIX_CAP.
    """
    if (g.values < 0).any():
        raise ValueError("exterior data must be nonnegative")
    circle = g.circle
    mask = np.asarray(cylinder_mask, dtype=bool)
    if mask.shape != g.values.shape:
        raise ValueError("cylinder mask must match the field shape")
    if mask.all():
        raise ValueError("cylinder must be a strict subset of space-time nodes")
    n_int = int(mask.sum())
    if n_int > SPACE_TIME_MATRIX_CAP:
        raise ValueError(f"{n_int} interior unknowns exceed cap {SPACE_TIME_MATRIX_CAP}")

    ext_values = np.where(mask, 0.0, g.values)
    rhs_field = frac_heat_spectral(dec, s, SpaceTimeField(values=ext_values, circle=circle))
    xi, ti = np.nonzero(mask)
    rhs = -rhs_field.values[mask]

    blocks = heat_power_lag_blocks(dec, circle, s)
    lag = (ti[:, None] - ti[None, :]) % circle.samples
    A_int = blocks[lag, xi[:, None], xi[None, :]]
    ui = scipy.linalg.solve(A_int, rhs)
    values = ext_values.copy()
    values[mask] = ui
    return SpaceTimeField(values=values, circle=circle)


def parabolic_residual_on(dec: SpectralDecomposition, s: float, u: SpaceTimeField,
                          mask: np.ndarray) -> float:
    """sup norm of H^s u over the masked region (solve verification)."""
    r = frac_heat_spectral(dec, s, u)
    return float(np.abs(r.values[np.asarray(mask, dtype=bool)]).max())
