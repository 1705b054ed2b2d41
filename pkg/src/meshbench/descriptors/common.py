"""Helpers shared by the local descriptors."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from ..detectors.features import FeaturePoints
from ..mesh import TriMesh

SUPPORT_MULTIPLIER = 6.0


def feature_scales(mesh: TriMesh, feats: FeaturePoints, fallback: float | None) -> np.ndarray:
    """Per-feature scales; ``fallback`` (fraction of diam) fills missing ones."""
    s = np.asarray(feats.scales, dtype=np.float64)
    missing = ~np.isfinite(s)
    if missing.any():
        if fallback is None:
            raise ValueError("descriptor needs feature scales; detector gave none and no fallback is set")
        s = np.where(missing, fallback * mesh.diam, s)
    if np.any(s <= 0):
        raise ValueError("feature scales must be positive")
    return s


def supports(mesh: TriMesh, centers: np.ndarray, radii: np.ndarray) -> list[np.ndarray]:
    """Vertices within Euclidean distance ``radii[i]`` of vertex ``centers[i]``, sorted."""
    tree = cKDTree(mesh.vertices)
    pts = mesh.vertices[centers]
    return [np.array(sorted(tree.query_ball_point(p, r)), dtype=np.int64) for p, r in zip(pts, radii)]


def linear_split(x: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split continuous bin coordinates (bin centers at integers) between two bins.

    Coordinates are clamped to ``[0, n-1]``; returns (low bin, high bin, high weight).
    """
    x = np.clip(x, 0.0, n - 1)
    lo = np.minimum(np.floor(x).astype(np.int64), n - 1)
    hi = np.minimum(lo + 1, n - 1)
    return lo, hi, x - lo


def circular_split(theta: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Angles (radians) into ``n`` orientation bins centered at ``k * 2pi/n``."""
    x = np.mod(theta, 2 * np.pi) / (2 * np.pi / n)
    lo = np.floor(x).astype(np.int64) % n
    return lo, (lo + 1) % n, x - np.floor(x)
