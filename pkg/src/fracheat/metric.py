"""Control distance on the node graph, metric balls, and cylinders.

Edges connect axis neighbours; the cost of the edge leaving node n along
axis j is spacing_j / max_i |c_ij| with the coefficient taken at the edge
midpoint (mean of the endpoint values).  That is the unit-speed move
|X phi| <= 1 allows to first order, and Dijkstra is exact on the graph.
Axes whose coefficients all vanish at an edge carry no edge there, so for
the Grushin frame the y direction is impassable on the x = 0 column and
connectivity runs through neighbouring columns.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, dijkstra

from .frames import VectorFieldFrame
from .grid import Grid
from .weights import WeightedMeasure


@dataclass(frozen=True)
class MetricField:
    """Distances from one source node (flat array, inf where unreachable)."""

    grid: Grid
    source: int
    dist: np.ndarray
    connected: bool

    def __post_init__(self):
        d = np.asarray(self.dist, dtype=float)
        d = d.copy()
        d.flags.writeable = False
        object.__setattr__(self, "dist", d)


def edge_graph(frame: VectorFieldFrame) -> sp.csr_matrix:
    """Symmetric sparse matrix of edge costs realizing |X phi| <= 1 moves."""
    grid = frame.grid
    n = grid.size
    rows, cols, costs = [], [], []
    for axis in range(grid.ndim):
        nbr = grid.shift_indices(axis, 1)
        here = np.arange(n)
        ok = nbr >= 0
        if grid.periodic[axis]:
            # keep each periodic edge once (wrap edge included via modular shift)
            pass
        speed = np.zeros(n)
        for i in range(frame.m):
            c = grid.flatten(frame.coeffs[i, axis])
            cm = 0.5 * np.abs(c[here[ok]] + c[nbr[ok]])
            tmp = np.zeros(n)
            tmp[here[ok]] = cm
            speed = np.maximum(speed, tmp)
        passable = ok & (speed > 0)
        rows.append(here[passable])
        cols.append(nbr[passable])
        costs.append(grid.spacing[axis] / speed[passable])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    costs = np.concatenate(costs)
    g = sp.csr_matrix((costs, (rows, cols)), shape=(n, n))
    return g.maximum(g.T)


def is_connected(frame: VectorFieldFrame) -> bool:
    ncomp, _ = connected_components(edge_graph(frame), directed=False)
    return ncomp == 1


def control_distance(frame: VectorFieldFrame, source: int) -> MetricField:
    """Shortest-path control distance from `source` to every node.

    Unreachable nodes get distance inf and the frame is flagged as
    disconnected (with a warning).
    """
    g = edge_graph(frame)
    dist = dijkstra(g, directed=False, indices=source)
    connected = bool(np.isfinite(dist).all())
    if not connected:
        warnings.warn("frame graph is disconnected; unreachable nodes have infinite distance")
    return MetricField(grid=frame.grid, source=int(source), dist=dist, connected=connected)


def all_pairs_distance(frame: VectorFieldFrame) -> np.ndarray:
    """Dense all-pairs control distance (desk-scale diagnostics only)."""
    return dijkstra(edge_graph(frame), directed=False)


def ball(metric: MetricField, r: float) -> np.ndarray:
    """Nodes with d(source, y) < r, sorted by node index."""
    if r <= 0:
        raise ValueError("radius must be positive")
    return np.flatnonzero(metric.dist < r)


def ball_saturated(metric: MetricField, r: float) -> bool:
    """True when the ball already covers every reachable node."""
    finite = metric.dist[np.isfinite(metric.dist)]
    return bool(finite.max() < r)


def volume(metric: MetricField, r: float, weight: WeightedMeasure = None) -> float:
    """Measure of the ball: node count times cell volume, or the weighted sum."""
    nodes = ball(metric, r)
    if weight is None:
        w = np.ones(metric.grid.size)
    else:
        w = weight.node_weights
        if w.shape[0] != metric.grid.size:
            raise ValueError("weight array does not match grid")
    return float(w[nodes].sum() * metric.grid.cell_volume)


def cylinder(ext_grid: Grid, base_metric: MetricField, z_index: int, r: float) -> np.ndarray:
    """Flat ext-grid nodes of C_r = B(x,r) x (z-r, z+r), sorted by index.

    `base_metric` is the control distance on the base grid from the
    cylinder's spatial center; `z_index` locates the center along the
    last (extension) axis of `ext_grid`.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    nz = ext_grid.dims[-1]
    zc = ext_grid.axis_coordinates(ext_grid.ndim - 1)
    z0 = zc[z_index]
    zsel = np.flatnonzero(np.abs(zc - z0) < r)
    xsel = ball(base_metric, r)
    flat = (xsel[:, None] * nz + zsel[None, :]).reshape(-1)
    return np.sort(flat)


def cylinder_comparability(ext_frame: VectorFieldFrame, base_metric: MetricField,
                           z_index: int, r: float) -> tuple:
    """Cylinder nodes plus empirical sigma_1 < sigma_2 with
    B~(center, sigma_1 r) inside C_r inside B~(center, sigma_2 r),
    measured against the extended-frame control distance.
    """
    ext_grid = ext_frame.grid
    nodes = cylinder(ext_grid, base_metric, z_index, r)
    center = int(base_metric.source * ext_grid.dims[-1] + z_index)
    dmet = control_distance(ext_frame, center)
    inside = np.zeros(ext_grid.size, dtype=bool)
    inside[nodes] = True
    d = dmet.dist
    sigma2 = float(d[inside].max() / r) if inside.any() else np.inf
    outside = ~inside
    sigma1 = float(d[outside].min() / r) if outside.any() else np.inf
    return nodes, sigma1, sigma2
