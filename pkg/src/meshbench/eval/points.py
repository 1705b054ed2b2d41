"""Point repeatability: does a null feature lie within a geodesic ball around
the groundtruth image of each transformed feature?"""

from __future__ import annotations

import numpy as np

from ..detectors.features import FeaturePoints
from ..geodesic import geodesic_distances, pairwise_geodesics
from ..mesh import TriMesh
from ..transforms.correspondence import CorrespondenceMap
from .config import EmptyEvaluableSet


def distance_to_points(dist: np.ndarray, null: TriMesh, corr: CorrespondenceMap, rows: np.ndarray) -> np.ndarray:
    """Geodesic distance from a source set to the groundtruth points of ``rows``.

    ``dist`` holds per-vertex distances (last axis = null vertices). A vertex
    ref reads the distance directly; a barycentric ref takes the minimum over
    its face corners of corner distance plus straight-line distance to the
    corner. Rows without groundtruth give nan.
    """
    dist = np.asarray(dist)
    out = np.full(dist.shape[:-1] + (len(rows),), np.nan)
    v, f = corr.vertex[rows], corr.face[rows]
    vb = v >= 0
    out[..., vb] = dist[..., v[vb]]
    fb = np.nonzero(f >= 0)[0]
    if len(fb):
        pts = corr.points(null)[rows[fb]]
        corners = null.faces[f[fb]]
        off = np.linalg.norm(null.vertices[corners] - pts[:, None, :], axis=2)
        out[..., fb] = (dist[..., corners] + off).min(axis=-1)
    return out


def evaluable(feats: FeaturePoints, corr: CorrespondenceMap) -> np.ndarray:
    """Transformed features that have groundtruth."""
    return feats.vertices[corr.valid[feats.vertices]]


def match_distances(fx: FeaturePoints, fy: FeaturePoints, corr: CorrespondenceMap, null: TriMesh, cap: float | None = None) -> np.ndarray:
    """Distance from each evaluable ``fy`` feature's groundtruth point to the
    nearest ``fx`` feature (``inf`` beyond ``cap``)."""
    rows = evaluable(fy, corr)
    if len(rows) == 0:
        raise EmptyEvaluableSet("no transformed feature has groundtruth correspondence")
    if len(fx) == 0:
        return np.full(len(rows), np.inf)
    d = geodesic_distances(null, fx.vertices, cap).distances
    out = distance_to_points(d, null, corr, rows)
    if cap is not None:
        out[out > cap] = np.inf
    return out


def point_repeatability(fx: FeaturePoints, fy: FeaturePoints, corr: CorrespondenceMap, null: TriMesh, rho: float) -> float:
    """Percentage of evaluable transformed features repeated within ``rho``."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    d = match_distances(fx, fy, corr, null, cap=rho)
    return 100.0 * float(np.mean(d <= rho))


def repeatability_vs_rho(fx: FeaturePoints, fy: FeaturePoints, corr: CorrespondenceMap, null: TriMesh, rhos) -> np.ndarray:
    rhos = np.asarray(rhos, dtype=np.float64)
    d = match_distances(fx, fy, corr, null, cap=float(rhos.max()))
    return 100.0 * (d[None, :] <= rhos[:, None]).mean(axis=1)


def feature_distance_matrix(fx_vertices: np.ndarray, fy_vertices: np.ndarray, corr: CorrespondenceMap, null: TriMesh, cap: float | None = None) -> np.ndarray:
    """``r[k, j]``: geodesic distance from the groundtruth point of transformed
    feature ``k`` to null feature ``j`` (nan rows without groundtruth)."""
    if len(fx_vertices) == 0:
        return np.zeros((len(fy_vertices), 0))
    D = pairwise_geodesics(null, fx_vertices, cap)
    r = distance_to_points(D, null, corr, np.asarray(fy_vertices, dtype=np.int64)).T
    if cap is not None:
        r[r > cap] = np.inf
    return r
