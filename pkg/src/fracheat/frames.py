"""Vector-field frames on grids and the model geometries used throughout.

A frame is a family X_1, ..., X_m of first-order fields given by per-axis
coefficient arrays.  A field may additionally carry an exact lattice flow
(a node permutation realizing one unit-speed step along the field); the
Heisenberg preset uses this to keep the assembled operator a signed
M-matrix, which axis-by-axis differencing of cross-axis coefficients
cannot do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Grid


@dataclass(frozen=True)
class VectorFieldFrame:
    """Frame X_1..X_m with coefficient arrays over grid nodes.

    Parameters
    ----------
    grid : Grid
    coeffs : ndarray, shape (m, ndim) + grid.shape
        coeffs[i, j] is the coefficient of d/dx_j in X_i at each node.
    shifts : tuple or None
        Optional per-field exact flow: shifts[i] is either None or a flat
        permutation array p with p[n] = index of the node reached by
        flowing along X_i for time `shift_steps[i]`.
    shift_steps : tuple or None
        Flow time per shifted field (the unit-speed step length).
    name : str
    """

    grid: Grid
    coeffs: np.ndarray
    shifts: tuple = None
    shift_steps: tuple = None
    name: str = "frame"

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        expected = (coeffs.shape[0], self.grid.ndim) + self.grid.shape
        if coeffs.shape != expected:
            raise ValueError(f"coeff array shape {coeffs.shape}, expected {expected}")
        coeffs = coeffs.copy()
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)
        if self.shifts is not None:
            if len(self.shifts) != coeffs.shape[0]:
                raise ValueError("one shift entry per field required")
            if self.shift_steps is None or len(self.shift_steps) != coeffs.shape[0]:
                raise ValueError("shift_steps required alongside shifts")

    @property
    def m(self) -> int:
        return int(self.coeffs.shape[0])

    def coefficient(self, i: int, axis: int) -> np.ndarray:
        return self.coeffs[i, axis]

    def field_shift(self, i: int):
        if self.shifts is None:
            return None
        return self.shifts[i]


def _centered_difference(grid: Grid, u: np.ndarray, axis: int) -> np.ndarray:
    """Second-order centered difference; one-sided at reflecting ends."""
    h = grid.spacing[axis]
    if grid.periodic[axis]:
        return (np.roll(u, -1, axis=axis) - np.roll(u, 1, axis=axis)) / (2.0 * h)
    out = np.empty_like(u, dtype=float)
    sl = [slice(None)] * grid.ndim

    def at(i):
        s = sl.copy()
        s[axis] = i
        return tuple(s)

    out[at(slice(1, -1))] = (u[at(slice(2, None))] - u[at(slice(0, -2))]) / (2.0 * h)
    out[at(0)] = (u[at(1)] - u[at(0)]) / h
    out[at(-1)] = (u[at(-1)] - u[at(-2)]) / h
    return out


def apply_field_centered(frame: VectorFieldFrame, i: int, u: np.ndarray) -> np.ndarray:
    """X_i u with centered differences (diagnostic-grade derivative)."""
    grid = frame.grid
    out = np.zeros(grid.shape, dtype=float)
    for axis in range(grid.ndim):
        c = frame.coeffs[i, axis]
        if not np.any(c):
            continue
        out += c * _centered_difference(grid, u, axis)
    return out


def carre_du_champ(frame: VectorFieldFrame, u: np.ndarray) -> np.ndarray:
    """Energy density |Xu|^2 = sum_i (X_i u)^2, centered differences.

    Parameters
    ----------
    frame : VectorFieldFrame
    u : ndarray shaped like the frame's grid

    Returns
    -------
    ndarray, same shape, nonnegative everywhere.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != frame.grid.shape:
        raise ValueError(f"field shape {u.shape} does not match grid {frame.grid.shape}")
    out = np.zeros(frame.grid.shape, dtype=float)
    for i in range(frame.m):
        out += apply_field_centered(frame, i, u) ** 2
    return out


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

def euclidean(ndim: int, n: int = 16, spacing: float = None, periodic: bool = True) -> VectorFieldFrame:
    """Euclidean frame X_i = d/dx_i on an n^ndim grid.

    Default spacing 2*pi/n puts the periodic spectrum near the integers
    squared, which keeps quadrature windows tame.
    """
    if spacing is None:
        spacing = 2.0 * math.pi / n
    grid = Grid(dims=(n,) * ndim, spacing=(spacing,) * ndim, periodic=(periodic,) * ndim)
    coeffs = np.zeros((ndim, ndim) + grid.shape)
    for i in range(ndim):
        coeffs[i, i] = 1.0
    return VectorFieldFrame(grid=grid, coeffs=coeffs, name=f"euclidean{ndim}")


def grushin(n: int = 16) -> VectorFieldFrame:
    """Grushin frame X_1 = d/dx, X_2 = x d/dy on [-1,1) x circle.

    The x axis is reflecting so the degenerate coefficient x stays
    continuous; the y axis is periodic.  Node columns include x = 0 and
    x = +-1/2 when n is a multiple of 4.
    """
    h = 2.0 / n
    grid = Grid(dims=(n, n), spacing=(h, h), periodic=(False, True), origin=(-1.0, 0.0))
    x = grid.coordinate_array(0)
    coeffs = np.zeros((2, 2) + grid.shape)
    coeffs[0, 0] = 1.0
    coeffs[1, 1] = x
    return VectorFieldFrame(grid=grid, coeffs=coeffs, name="grushin")


def heisenberg(n: int = 8) -> VectorFieldFrame:
    """Heisenberg-type frame in polarized coordinates:
    X_1 = d/dx, X_2 = d/dy + x d/dt'.

    Grid: n x n x n periodic with spacings (h, h, h^2), h = 2/n, and x, y
    centered so x/h is an integer.  The time-h flow of each field then
    maps lattice nodes to lattice nodes exactly, so both fields carry
    exact shift realizations and the assembled operator keeps nonpositive
    off-diagonal entries; the commutator of the two flows steps the
    t'-axis by exactly one cell, which makes the flow graph connected.
    (The symmetric-coordinate realization with coefficients -y/2, x/2
    conserves the parity of k + ij on even tori and disconnects the
    lattice into two components, so it is unusable here.)
    """
    if n % 2:
        raise ValueError("heisenberg preset needs even n")
    h = 2.0 / n
    ht = h * h
    grid = Grid(dims=(n, n, n), spacing=(h, h, ht), periodic=(True, True, True),
                origin=(-1.0, -1.0, 0.0))
    x = grid.coordinate_array(0)
    coeffs = np.zeros((2, 3) + grid.shape)
    coeffs[0, 0] = 1.0
    coeffs[1, 1] = 1.0
    coeffs[1, 2] = x

    ii, jj, kk = np.indices(grid.shape)
    # flow of X_1 for time h: (x, y, t') -> (x+h, y, t')
    p1 = np.ravel_multi_index((np.mod(ii + 1, n), jj, kk), grid.shape).reshape(-1)
    # flow of X_2 for time h: (x, y, t') -> (x, y+h, t' + x h); t-index shift x/h
    k2 = np.mod(kk + (ii - n // 2), n)
    p2 = np.ravel_multi_index((ii, np.mod(jj + 1, n), k2), grid.shape).reshape(-1)
    return VectorFieldFrame(grid=grid, coeffs=coeffs, shifts=(p1, p2),
                            shift_steps=(h, h), name="heisenberg")


PRESETS = {"euclidean1": lambda **kw: euclidean(1, **kw),
           "euclidean2": lambda **kw: euclidean(2, **kw),
           "euclidean3": lambda **kw: euclidean(3, **kw),
           "grushin": grushin,
           "heisenberg": heisenberg}


def make_preset(name: str, **kwargs) -> VectorFieldFrame:
    """Build a named preset frame; see PRESETS for the registry."""
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; options: {sorted(PRESETS)}") from None
    return factory(**kwargs)


def extend_frame(frame: VectorFieldFrame, n_z: int, h_z: float) -> VectorFieldFrame:
    """Lift a frame to grid x z-axis, appending the field d/dz.

    The z axis is reflecting, has n_z nodes (odd counts put a node at
    z = 0) and is centered at 0.  This is the extended geometry whose
    carre du champ is |Xu|^2 + (du/dz)^2.
    """
    if frame.shifts is not None:
        raise NotImplementedError("extension of shift-realized frames is not supported")
    g = frame.grid
    origin_z = -0.5 * (n_z - 1) * h_z
    grid = Grid(dims=g.dims + (n_z,), spacing=g.spacing + (h_z,),
                periodic=g.periodic + (False,), origin=g.origin + (origin_z,))
    m = frame.m
    ndim = g.ndim
    coeffs = np.zeros((m + 1, ndim + 1) + grid.shape)
    for i in range(m):
        for j in range(ndim):
            coeffs[i, j] = frame.coeffs[i, j][..., None]
    coeffs[m, ndim] = 1.0
    return VectorFieldFrame(grid=grid, coeffs=coeffs, name=frame.name + "+z")
