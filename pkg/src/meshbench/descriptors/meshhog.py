"""Mesh-HoG: histogram of scalar-field gradients around a feature.

Layout is 4 polar sectors x 8 orientation bins (d = 32), a flattened
stand-in for the two-level histogram of the original method.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ..detectors.features import FeaturePoints
from ..geometry import mean_curvature
from ..mesh import ScalarField, TriMesh
from .base import DescriptorSet
from .common import SUPPORT_MULTIPLIER, circular_split

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MeshHogConfig:
    sectors: int = 4
    orientations: int = 8
    multiplier: float = SUPPORT_MULTIPLIER
    default_radius: float = 0.05  # fraction of diam when features have no scale

    def __post_init__(self):
        if self.sectors < 1 or self.orientations < 2:
            raise ValueError("invalid Mesh-HoG bin layout")


def face_gradients(mesh: TriMesh, values: np.ndarray) -> np.ndarray:
    """Piecewise-linear gradient per face: ``sum_i f_i (n x e_i) / 2A``."""
    V, F = mesh.vertices, mesh.faces
    n = mesh.face_normals
    two_a = 2 * mesh.face_areas
    g = np.zeros((len(F), 3))
    for i in range(3):
        e = V[F[:, (i + 2) % 3]] - V[F[:, (i + 1) % 3]]  # edge opposite corner i
        g += values[F[:, i], None] * np.cross(n, e)
    return g / two_a[:, None]


def mesh_hog(mesh: TriMesh, feats: FeaturePoints, field: ScalarField | np.ndarray | None = None, config: MeshHogConfig | None = None) -> DescriptorSet:
    """Mesh-HoG descriptors; ``field`` defaults to mean curvature.

    Faces whose centroid lies within the support radius contribute their
    tangent-projected gradient, weighted by ``|grad f| * area``. Sectors
    and orientations are measured from the dominant (area-weighted mean)
    gradient direction; orientations interpolate between the two nearest
    bin centers. Rows are L2-normalized.
    """
    cfg = config or MeshHogConfig()
    f = mean_curvature(mesh).values if field is None else (field.values if isinstance(field, ScalarField) else np.asarray(field, float))
    if len(f) != mesh.n_vertices:
        raise ValueError("field length does not match vertex count")
    G = face_gradients(mesh, f)
    cent = mesh.vertices[mesh.faces].mean(axis=1)
    fa = mesh.face_areas
    scales = feats.scales
    radii = np.where(np.isfinite(scales), cfg.multiplier * scales, cfg.default_radius * mesh.diam)
    tree = cKDTree(cent)
    out = np.zeros((len(feats), cfg.sectors * cfg.orientations))
    degenerate = np.zeros(len(feats), dtype=bool)
    for row, (p, r) in enumerate(zip(feats.vertices, radii)):
        idx = np.array(sorted(tree.query_ball_point(mesh.vertices[p], r)), dtype=np.int64)
        n = mesh.normals[p]
        g = G[idx] - np.outer(G[idx] @ n, n) if len(idx) else np.zeros((0, 3))
        mag = np.linalg.norm(g, axis=1)
        w = mag * fa[idx]
        scale_ref = max(float(np.abs(G).max()), 1e-300)
        if len(idx) == 0 or w.sum() <= 1e-14 * scale_ref * fa.sum():
            degenerate[row] = True
            continue
        dom = (g * fa[idx, None]).sum(axis=0)
        if np.linalg.norm(dom) <= 1e-9 * w.sum():
            dom = g[np.argmax(w)]  # mean cancels; fall back to the strongest face
        x = dom / np.linalg.norm(dom)
        y = np.cross(n, x)
        off = cent[idx] - mesh.vertices[p]
        phi = np.mod(np.arctan2(off @ y, off @ x), 2 * np.pi)
        sector = np.minimum((phi / (2 * np.pi / cfg.sectors)).astype(np.int64), cfg.sectors - 1)
        o0, o1, wo = circular_split(np.arctan2(g @ y, g @ x), cfg.orientations)
        hist = np.zeros((cfg.sectors, cfg.orientations))
        np.add.at(hist, (sector, o0), w * (1 - wo))
        np.add.at(hist, (sector, o1), w * wo)
        h = hist.ravel()
        out[row] = h / np.linalg.norm(h)
    if degenerate.any():
        logger.info("mesh_hog: %d features with zero gradient support", int(degenerate.sum()))
    return DescriptorSet(out, feats.vertices, "mesh-hog", degenerate=degenerate, diagnostics={"zero_gradient": int(degenerate.sum())})
