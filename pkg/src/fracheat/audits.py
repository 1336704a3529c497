"""Doubling, Poincare, and Sobolev audits of discrete metric geometries.

All constants here are measured, not derived: doubling ratios come from
ball volumes in the control distance, the Poincare constant is the sharp
discrete constant from a generalized symmetric eigenproblem, and the
Sobolev exponent is probed on a deterministic bump family plus the
doubling-derived exponent Q/(Q-2).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .frames import VectorFieldFrame
from .generator import field_matrix
from .metric import MetricField, ball, ball_saturated, control_distance, volume
from .weights import WeightedMeasure


@dataclass(frozen=True)
class DoublingRow:
    center: int
    r: float
    ratio: float
    weighted: bool


@dataclass(frozen=True)
class DoublingReport:
    rows: tuple
    excluded: int
    c_doubling: float

    @property
    def q_exponent(self) -> float:
        return float(np.log2(self.c_doubling))


def doubling_audit(frame: VectorFieldFrame, centers, radii,
                   weight: WeightedMeasure = None) -> DoublingReport:
    """Table of V(x, 2r) / V(x, r) over (center, radius) pairs.

    Radii whose doubled ball saturates the reachable grid (or exceeds the
    half-diameter from that center) are excluded and counted.  With a
    weight, volumes are weighted sums; at a = 0 the weights are exactly
    one and the ratios match the unweighted ones bit for bit.
    """
    rows = []
    excluded = 0
    for center in centers:
        metric = control_distance(frame, int(center))
        finite = metric.dist[np.isfinite(metric.dist)]
        half_diam = float(finite.max()) / 2.0
        for r in radii:
            r = float(r)
            if 2.0 * r > half_diam or ball_saturated(metric, 2.0 * r):
                excluded += 1
                continue
            v1 = volume(metric, r, weight)
            v2 = volume(metric, 2.0 * r, weight)
            if v1 <= 0:
                excluded += 1
                continue
            rows.append(DoublingRow(center=int(center), r=r, ratio=v2 / v1,
                                    weighted=weight is not None))
    if not rows:
        raise ValueError("no admissible (center, radius) pairs in the audit")
    c_d = max(row.ratio for row in rows)
    return DoublingReport(rows=tuple(rows), excluded=excluded, c_doubling=float(c_d))


def dirichlet_form_on(frame: VectorFieldFrame, nodes: np.ndarray,
                      node_weights: np.ndarray) -> sp.csr_matrix:
    """Weighted discrete Dirichlet form restricted to a node set.

    Sums mu(n) (X_i u(n))^2 over rows whose difference stencil lies
    entirely inside the set; the grid measure (cell volume) is folded
    into `node_weights` by the caller.
    """
    n = frame.grid.size
    sel = np.zeros(n, dtype=bool)
    sel[nodes] = True
    order = np.full(n, -1, dtype=np.int64)
    order[nodes] = np.arange(len(nodes))
    K = sp.csr_matrix((len(nodes), len(nodes)))
    for i in range(frame.m):
        X = field_matrix(frame, i).tocsr()
        touches_out = (X @ (~sel).astype(float)) != 0
        nonzero_row = np.diff(X.indptr) > 0
        rows_ok = np.flatnonzero(sel & nonzero_row & ~touches_out)
        if rows_ok.size == 0:
            continue
        Xs = X[rows_ok][:, nodes]
        w = sp.diags(node_weights[rows_ok])
        K = K + (Xs.T @ w @ Xs).tocsr()
    return K


def _subset_connected(K: sp.csr_matrix) -> bool:
    coo = K.tocoo()
    off = coo.row != coo.col
    adj = sp.csr_matrix((np.abs(coo.data[off]), (coo.row[off], coo.col[off])), shape=K.shape)
    ncomp, _ = connected_components(adj, directed=False)
    return ncomp == 1


def poincare_constant(frame: VectorFieldFrame, center: int, r: float,
                      weight: WeightedMeasure = None,
                      metric: MetricField = None) -> float:
    """Sharp discrete Poincare constant for the pair B(x,r), B(x,2r).

    Maximizes int_{B_r} (u - u_B)^2 dmu over r^2 int_{B_2r} |Xu|^2 dmu on
    the node space of the enlarged ball, as the top eigenvalue of the
    generalized symmetric pencil with the constant mode deflated.
    """
    if metric is None:
        metric = control_distance(frame, int(center))
    inner = ball(metric, r)
    outer = ball(metric, 2.0 * r)
    if len(inner) < 3:
        raise ValueError("inner ball resolves fewer than 3 nodes")
    w = np.ones(frame.grid.size) if weight is None else weight.node_weights
    mu = w * frame.grid.cell_volume

    K = dirichlet_form_on(frame, outer, mu)
    if not _subset_connected(K):
        raise ValueError("enlarged ball is disconnected; quadratic form degenerate")

    m = np.zeros(len(outer))
    pos = {node: i for i, node in enumerate(outer)}
    for node in inner:
        m[pos[node]] = mu[node]
    total = m.sum()
    A = np.diag(m) - np.outer(m, m) / total
    B = (r * r) * K.toarray()

    Z = scipy.linalg.null_space(np.ones((1, len(outer))))
    Ar = Z.T @ A @ Z
    Br = Z.T @ B @ Z
    theta = scipy.linalg.eigh(Ar, Br, eigvals_only=True)
    return float(theta[-1])


@dataclass(frozen=True)
class SobolevProbe:
    kappa_estimate: float
    constants: tuple  # rows (kappa, constant)
    q_exponent: float


def _bump(dist: np.ndarray, rho: float) -> np.ndarray:
    x = np.clip(1.0 - (dist / rho) ** 2, 0.0, None)
    return x * x


def sobolev_probe(frame: VectorFieldFrame, center: int, r: float,
                  weight: WeightedMeasure = None, kappas=(1.25, 1.5, 2.0, 3.0),
                  q_exponent: float = None, kappa_cap: float = 10.0) -> SobolevProbe:
    """Probe the Sobolev embedding constant on compactly supported bumps.

    For each kappa, reports the largest ratio of the weighted 2*kappa
    norm to the weighted Dirichlet energy over a deterministic family of
    polynomial bumps (3 scales x 5 centers inside the ball).  The
    exponent estimate itself comes from the doubling exponent,
    kappa = Q/(Q-2), capped for Q <= 2 (one-dimensional geometries).
    """
    metric = control_distance(frame, int(center))
    nodes = ball(metric, r)
    if len(nodes) < 5:
        raise ValueError("ball too small to host the bump family")
    w = np.ones(frame.grid.size) if weight is None else weight.node_weights
    mu = w * frame.grid.cell_volume

    ring = nodes[np.argsort(np.abs(metric.dist[nodes] - r / 3.0), kind="stable")]
    bump_centers = [int(center)] + [int(v) for v in ring[:4]]
    family = []
    for c in bump_centers:
        dc = control_distance(frame, c).dist
        margin = r - metric.dist[c]
        for frac in (0.5, 0.33, 0.17):
            rho = min(frac * r, 0.95 * margin)
            if rho <= 0:
                continue
            phi = _bump(dc, rho)
            if np.any(phi):
                family.append(phi)
    if not family:
        raise ValueError("empty admissible bump family")

    K = dirichlet_form_on(frame, nodes, mu)
    rows = []
    for kappa in kappas:
        best = 0.0
        for phi in family:
            p = phi[nodes]
            energy = float(p @ (K @ p))
            if energy <= 0:
                continue
            lhs = float((np.abs(p) ** (2.0 * kappa) * mu[nodes]).sum() ** (1.0 / (2.0 * kappa)))
            best = max(best, lhs / np.sqrt(energy))
        rows.append((float(kappa), best))

    if q_exponent is None:
        # small local doubling audit for Q
        finite = metric.dist[np.isfinite(metric.dist)]
        rr = min(r / 2.0, float(finite.max()) / 4.1)
        rep = doubling_audit(frame, [center], [rr], weight=weight)
        q_exponent = rep.q_exponent
    kappa_est = q_exponent / (q_exponent - 2.0) if q_exponent > 2.0 else kappa_cap
    return SobolevProbe(kappa_estimate=float(min(kappa_est, kappa_cap)),
                        constants=tuple(rows), q_exponent=float(q_exponent))


@dataclass(frozen=True)
class GeometryAuditReport:
    """Aggregate of the geometry audits run by the audit command."""

    doubling: DoublingReport
    weighted_doubling: DoublingReport = None
    poincare_rows: tuple = field(default=())   # (center, r, a or None, constant)
    a2_rows: tuple = field(default=())         # (a, interval, characteristic)
    sobolev: SobolevProbe = None
