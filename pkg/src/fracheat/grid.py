"""Uniform tensor grids with mixed periodic/reflecting axes.

Nodes are indexed in C order; spatial fields are either shaped like the
grid or flattened to one value per node.  All coordinates are affine,
``x_j[i] = origin_j + i * spacing_j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Refuse to build grids past this many nodes; dense spectral work has its
# own (smaller) cap in generator.spectral_decompose.
DEFAULT_NODE_CAP = 262_144


class GridCapExceeded(ValueError):
    """Requested grid is larger than the configured desk-scale cap."""


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular grid.

    Parameters
    ----------
    dims : tuple of int
        Nodes per axis, each >= 2.
    spacing : tuple of float
        Step per axis (length units), each > 0.
    periodic : tuple of bool
        Per-axis wrap flag.  Non-periodic axes behave as reflecting
        (Neumann) ends under the forward-difference calculus.
    origin : tuple of float
        Coordinate of node 0 per axis.
    """

    dims: tuple
    spacing: tuple
    periodic: tuple
    origin: tuple = field(default=None)
    node_cap: int = DEFAULT_NODE_CAP

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        spacing = tuple(float(h) for h in self.spacing)
        periodic = tuple(bool(p) for p in self.periodic)
        origin = self.origin
        if origin is None:
            origin = (0.0,) * len(dims)
        origin = tuple(float(o) for o in origin)
        if not (len(dims) == len(spacing) == len(periodic) == len(origin)):
            raise ValueError("dims, spacing, periodic, origin must have equal length")
        if any(d < 2 for d in dims):
            raise ValueError("every axis needs at least 2 nodes")
        if any(h <= 0 for h in spacing):
            raise ValueError("spacings must be positive")
        n = int(np.prod(dims))
        if n > self.node_cap:
            raise GridCapExceeded(f"grid has {n} nodes, cap is {self.node_cap}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "periodic", periodic)
        object.__setattr__(self, "origin", origin)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def shape(self) -> tuple:
        return self.dims

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis_coordinates(self, axis: int) -> np.ndarray:
        """Node coordinates along one axis."""
        return self.origin[axis] + self.spacing[axis] * np.arange(self.dims[axis])

    def coordinate_array(self, axis: int) -> np.ndarray:
        """Coordinate of every node along `axis`, shaped like the grid."""
        c = self.axis_coordinates(axis)
        shape = [1] * self.ndim
        shape[axis] = self.dims[axis]
        return np.broadcast_to(c.reshape(shape), self.dims).copy()

    def flatten(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u)
        if u.shape[: self.ndim] != self.dims:
            raise ValueError(f"field shape {u.shape} does not match grid {self.dims}")
        return u.reshape((self.size,) + u.shape[self.ndim:])

    def unflatten(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u)
        return u.reshape(self.dims + u.shape[1:])

    def node_index(self, multi) -> int:
        return int(np.ravel_multi_index(tuple(multi), self.dims))

    def node_multi(self, index: int) -> tuple:
        return tuple(int(i) for i in np.unravel_index(index, self.dims))

    def node_coordinates(self, index: int) -> tuple:
        multi = self.node_multi(index)
        return tuple(self.origin[j] + multi[j] * self.spacing[j] for j in range(self.ndim))

    def shift_indices(self, axis: int, step: int = 1) -> np.ndarray:
        """Flat index of the node `step` cells along `axis` from each node.

        Periodic axes wrap; on non-periodic axes, out-of-range neighbours
        are marked -1.
        """
        idx = np.indices(self.dims)
        moved = idx[axis] + step
        n = self.dims[axis]
        if self.periodic[axis]:
            moved = np.mod(moved, n)
            valid = np.ones(self.dims, dtype=bool)
        else:
            valid = (moved >= 0) & (moved < n)
            moved = np.clip(moved, 0, n - 1)
        idx = idx.copy()
        idx[axis] = moved
        flat = np.ravel_multi_index([idx[j] for j in range(self.ndim)], self.dims)
        out = flat.reshape(self.dims).astype(np.int64)
        out[~valid] = -1
        return out.reshape(-1)
