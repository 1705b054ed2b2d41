"""Harris 3D: Harris corner response of a quadratic patch fitted around each vertex."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ..mesh import TriMesh
from .features import FeaturePoints

logger = logging.getLogger(__name__)

HARRIS_K = 0.04
# responses are dimensionless; below this they are rounding noise
ZERO_RESPONSE = 1e-20


@dataclass(frozen=True)
class HarrisConfig:
    mode: str = "ring-1"  # ring-1 | ring-2 | adaptive
    delta: float = 0.01  # adaptive radius as a fraction of diam
    target: int = 450
    k: float = HARRIS_K

    def __post_init__(self):
        if self.mode not in ("ring-1", "ring-2", "adaptive"):
            raise ValueError(f"unknown Harris neighborhood mode {self.mode!r}")
        if self.mode == "adaptive" and not 0 < self.delta <= 0.2:
            raise ValueError("adaptive delta must be in (0, 0.2]")
        if self.target < 1:
            raise ValueError("target must be >= 1")


def _neighborhoods(mesh: TriMesh, cfg: HarrisConfig) -> list[np.ndarray]:
    if cfg.mode == "ring-1":
        return mesh.rings
    if cfg.mode == "ring-2":
        return [mesh.k_ring(v, 2) for v in range(mesh.n_vertices)]
    # Euclidean ball, never smaller than the 1-ring
    tree = cKDTree(mesh.vertices)
    balls = tree.query_ball_point(mesh.vertices, cfg.delta * mesh.diam)
    return [np.union1d(np.setdiff1d(b, [v]), mesh.rings[v]).astype(np.int64) for v, b in enumerate(balls)]


def vertex_response(points: np.ndarray, center: np.ndarray, k: float = HARRIS_K) -> float | None:
    """Harris response of one neighborhood; ``None`` if fewer than 6 points.

    ``points`` includes the center vertex.
    """
    if len(points) < 6:
        return None
    c = points.mean(axis=0)
    _, vecs = np.linalg.eigh((points - c).T @ (points - c))
    # x = major, y = middle, z = least-variance axis
    frame = vecs[:, ::-1]
    local = (points - center) @ frame
    radius = np.sqrt((local[:, :2] ** 2).sum(axis=1)).max()
    if radius <= 0:
        return None
    x, y, z = (local / radius).T
    A = np.column_stack([x * x, x * y, y * y, x, y, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, z, rcond=None)
    a, b, cc, d, e, _ = coef
    s2 = (1.0 / 3.0) ** 2
    # Gaussian-weighted moments of fx = 2a x + b y + d, fy = b x + 2c y + e
    exx = (4 * a * a + b * b) * s2 + d * d
    eyy = (b * b + 4 * cc * cc) * s2 + e * e
    exy = (2 * a * b + 2 * b * cc) * s2 + d * e
    r = exx * eyy - exy * exy - k * (exx + eyy) ** 2
    return 0.0 if abs(r) < ZERO_RESPONSE else float(r)


def harris_responses(mesh: TriMesh, cfg: HarrisConfig) -> tuple[np.ndarray, int]:
    """Response per vertex (nan where skipped) and the number skipped."""
    hoods = _neighborhoods(mesh, cfg)
    v = mesh.vertices
    out = np.full(mesh.n_vertices, np.nan)
    for i, nb in enumerate(hoods):
        r = vertex_response(v[np.r_[i, nb]], v[i], cfg.k)
        if r is not None:
            out[i] = r
    skipped = int(np.isnan(out).sum())
    return out, skipped


def ring_local_maxima(mesh: TriMesh, values: np.ndarray) -> np.ndarray:
    """Mask of vertices beating all 1-ring neighbors; ties go to the lower index."""
    val = np.where(np.isnan(values), -np.inf, values)
    adj = mesh.adjacency
    out = np.zeros(mesh.n_vertices, dtype=bool)
    for i in range(mesh.n_vertices):
        if not np.isfinite(val[i]):
            continue
        nb = adj.indices[adj.indptr[i] : adj.indptr[i + 1]]
        nv = val[nb]
        out[i] = np.all((val[i] > nv) | ((val[i] == nv) & (i < nb)))
    return out


def harris3d(mesh: TriMesh, mode: str = "ring-1", target: int = 450, delta: float = 0.01, config: HarrisConfig | None = None) -> FeaturePoints:
    """Harris 3D interest points.

    Local maxima over the 1-ring are ranked by response; when there are
    fewer than ``target`` of them the remaining slots are filled with the
    best non-maximal vertices so that the output size is fixed.
    """
    cfg = config or HarrisConfig(mode=mode, delta=delta, target=target)
    if cfg.target > mesh.n_vertices:
        raise ValueError("target exceeds vertex count")
    resp, skipped = harris_responses(mesh, cfg)
    if skipped:
        logger.info("harris3d: %d vertices skipped (fewer than 6 neighborhood points)", skipped)
    maxima = ring_local_maxima(mesh, resp)
    idx = np.arange(mesh.n_vertices)
    valid = ~np.isnan(resp)
    best = FeaturePoints.select(idx[maxima], resp[maxima], target=cfg.target)
    diag = {"skipped": skipped, "local_maxima": int(maxima.sum()), "topped_up": 0}
    if len(best) < cfg.target:
        rest = valid & ~maxima
        extra = FeaturePoints.select(idx[rest], resp[rest], target=cfg.target - len(best))
        diag["topped_up"] = len(extra)
        v = np.r_[best.vertices, extra.vertices]
        r = np.r_[best.responses, extra.responses]
        # keep the descending-response invariant across the two groups
        return FeaturePoints.select(v, r, diagnostics=diag)
    return FeaturePoints(best.vertices, best.responses, None, diag)
