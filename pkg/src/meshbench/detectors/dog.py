"""Difference-of-Gaussians detectors on a scalar field (Mesh DoG) and on the
mesh geometry itself (Mesh-Scale DoG)."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..geometry import gaussian_curvature, mean_curvature
from ..mesh import ScalarField, TriMesh
from .features import FeaturePoints

logger = logging.getLogger(__name__)

# |DoG| below this fraction of the field magnitude is treated as zero
FLAT_TOL = 1e-10


@dataclass(frozen=True)
class DoGConfig:
    field: str = "mean"  # mean | gaussian
    scales: int = 6
    target: int | None = 400
    per_octave: int = 3

    def __post_init__(self):
        if self.scales < 3:
            raise ValueError("need at least 3 DoG scales")
        if self.target is not None and self.target < 1:
            raise ValueError("target must be >= 1")


def gaussian_kernel(mesh: TriMesh) -> tuple[sparse.csr_matrix, float]:
    """Row-stochastic one-ring Gaussian kernel and its bandwidth.

    Weight ``exp(-l^2 / 2h^2)`` for each edge of length ``l`` (and 1 for the
    vertex itself), ``h`` = mean edge length, rows renormalized.
    """
    h = float(mesh.edge_lengths.mean())
    e, ell = mesh.edges, mesh.edge_lengths
    w = np.exp(-(ell**2) / (2 * h * h))
    n = mesh.n_vertices
    K = sparse.coo_matrix(
        (np.r_[w, w, np.ones(n)], (np.r_[e[:, 0], e[:, 1], np.arange(n)], np.r_[e[:, 1], e[:, 0], np.arange(n)])),
        shape=(n, n),
    ).tocsr()
    K = sparse.diags(1.0 / np.asarray(K.sum(axis=1)).ravel()) @ K
    return K.tocsr(), h


def smoothing_schedule(levels: int, per_octave: int) -> np.ndarray:
    """Cumulative kernel applications for levels 0..levels; doubles per octave."""
    steps = [2 ** (i // per_octave) for i in range(levels)]
    return np.r_[0, np.cumsum(steps)]


def scale_space(values: np.ndarray, K: sparse.csr_matrix, schedule: np.ndarray) -> list[np.ndarray]:
    out = [np.asarray(values, dtype=np.float64)]
    cur = out[0]
    for a, b in zip(schedule[:-1], schedule[1:]):
        for _ in range(int(b - a)):
            cur = K @ cur
        out.append(cur)
    return out


def _neighbor_reduce(mesh: TriMesh, D: np.ndarray, op) -> np.ndarray:
    adj = mesh.adjacency
    return op.reduceat(D[:, adj.indices], adj.indptr[:-1], axis=1)


def scale_space_extrema(mesh: TriMesh, D: np.ndarray, maxima: bool = True, minima: bool = True, tol: float = 0.0):
    """Strict extrema of ``D`` (levels x vertices) over the 1-ring and adjacent levels.

    Boundary levels compare against their single existing neighbor level.
    Returns (level, vertex) index arrays.
    """
    L = D.shape[0]
    cand = np.zeros(D.shape, dtype=bool)
    if maxima:
        nb = _neighbor_reduce(mesh, D, np.maximum)
        up = np.full(D.shape, -np.inf)
        dn = np.full(D.shape, -np.inf)
        up[:-1], dn[1:] = D[1:], D[:-1]
        cand |= (D > nb) & (D > up) & (D > dn) & (D > tol)
    if minima:
        nb = _neighbor_reduce(mesh, D, np.minimum)
        up = np.full(D.shape, np.inf)
        dn = np.full(D.shape, np.inf)
        up[:-1], dn[1:] = D[1:], D[:-1]
        cand |= (D < nb) & (D < up) & (D < dn) & (D < -tol)
    lv, vx = np.nonzero(cand)
    assert lv.max(initial=0) < L
    return lv, vx


def _best_per_vertex(lv, vx, resp, scales, target):
    """Keep the strongest level per vertex, then the top ``target`` vertices."""
    order = np.lexsort((lv, -resp, vx))
    vx, lv, resp = vx[order], lv[order], resp[order]
    first = np.r_[True, vx[1:] != vx[:-1]]
    return FeaturePoints.select(vx[first], resp[first], scales[lv[first]], target=target)


def _field_values(mesh: TriMesh, field) -> np.ndarray:
    if isinstance(field, ScalarField):
        return field.values
    if field == "mean":
        return mean_curvature(mesh).values
    if field == "gaussian":
        return gaussian_curvature(mesh).values
    return ScalarField(field).values


def mesh_dog(mesh: TriMesh, field="mean", scales: int = 6, target: int | None = 400, config: DoGConfig | None = None) -> FeaturePoints:
    """Mesh DoG on a curvature field (or any ``ScalarField``).

    ``scales`` is the number of DoG levels; feature scale is the kernel
    width ``h * sqrt(n)`` after the ``n`` cumulative smoothing passes of the
    more smoothed level in the pair.
    """
    cfg = config or DoGConfig(field if isinstance(field, str) else "mean", scales, target)
    f = _field_values(mesh, field if config is None else cfg.field)
    if len(f) != mesh.n_vertices:
        raise ValueError("field length does not match vertex count")
    K, h = gaussian_kernel(mesh)
    sched = smoothing_schedule(cfg.scales, cfg.per_octave)
    levels = scale_space(f, K, sched)
    D = np.array([b - a for a, b in zip(levels[:-1], levels[1:])])
    tol = FLAT_TOL * max(float(np.abs(f).max()), 1e-300)
    lv, vx = scale_space_extrema(mesh, D, tol=tol)
    if len(vx) == 0:
        warnings.warn("mesh_dog: field has no strict scale-space extrema", RuntimeWarning, stacklevel=2)
        return FeaturePoints(np.zeros(0, np.int64), np.zeros(0), np.zeros(0), {"candidates": 0})
    widths = h * np.sqrt(sched[1:])
    out = _best_per_vertex(lv, vx, np.abs(D[lv, vx]), widths, cfg.target)
    out.diagnostics["candidates"] = int(len(np.unique(vx)))
    return out


@dataclass(frozen=True)
class ScaleDoGConfig:
    levels: int = 6
    target: int | None = None
    per_octave: int = 3

    def __post_init__(self):
        if self.levels < 3:
            raise ValueError("need at least 3 DoG levels")


def mesh_scale_dog(mesh: TriMesh, levels: int = 6, target: int | None = None, config: ScaleDoGConfig | None = None) -> FeaturePoints:
    """Mesh-Scale DoG: maxima of the displacement between consecutive
    Gaussian-filtered copies of the vertex positions.

    The filter is built once from the input geometry. Each feature's scale is
    the filter width at its level.
    """
    cfg = config or ScaleDoGConfig(levels, target)
    K, h = gaussian_kernel(mesh)
    sched = smoothing_schedule(cfg.levels, cfg.per_octave)
    pos = scale_space(mesh.vertices, K, sched)
    D = np.array([np.linalg.norm(b - a, axis=1) for a, b in zip(pos[:-1], pos[1:])])
    tol = FLAT_TOL * mesh.diam
    lv, vx = scale_space_extrema(mesh, D, minima=False, tol=tol)
    if len(vx) == 0:
        warnings.warn("mesh_scale_dog: no scale-space maxima", RuntimeWarning, stacklevel=2)
        return FeaturePoints(np.zeros(0, np.int64), np.zeros(0), np.zeros(0), {"candidates": 0})
    widths = h * np.sqrt(sched[1:])
    out = _best_per_vertex(lv, vx, D[lv, vx], widths, cfg.target)
    out.diagnostics["candidates"] = int(len(np.unique(vx)))
    return out
