"""Scale-invariant spin images."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..detectors.features import FeaturePoints
from ..mesh import TriMesh
from .base import DescriptorSet
from .common import SUPPORT_MULTIPLIER, feature_scales, linear_split, supports

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpinConfig:
    n_alpha: int = 8
    n_beta: int = 8
    multiplier: float = SUPPORT_MULTIPLIER
    fallback_scale: float | None = None  # fraction of diam for scale-less features

    def __post_init__(self):
        if self.n_alpha < 2 or self.n_beta < 2:
            raise ValueError("spin image needs at least 2x2 bins")
        if self.multiplier <= 0:
            raise ValueError("support multiplier must be positive")


def spin_image(mesh: TriMesh, feats: FeaturePoints, bins: tuple[int, int] = (8, 8), config: SpinConfig | None = None) -> DescriptorSet:
    """Spin image over a support of radius ``multiplier * scale``.

    For support vertex ``q`` around feature ``p`` with normal ``n``:
    ``alpha = |(q-p) - ((q-p).n) n| / r`` in [0, 1] and
    ``beta = (q-p).n / r`` in [-1, 1]. Vertex areas are split bilinearly
    between the four nearest bin centers; rows are L1-normalized.
    """
    cfg = config or SpinConfig(*bins)
    na, nb = cfg.n_alpha, cfg.n_beta
    radii = cfg.multiplier * feature_scales(mesh, feats, cfg.fallback_scale)
    sup = supports(mesh, feats.vertices, radii)
    V, N, A = mesh.vertices, mesh.normals, mesh.vertex_areas
    out = np.zeros((len(feats), na * nb))
    degenerate = np.zeros(len(feats), dtype=bool)
    for row, (p, r, idx) in enumerate(zip(feats.vertices, radii, sup)):
        if len(idx) == 0:
            degenerate[row] = True
            continue
        d = V[idx] - V[p]
        h = d @ N[p]
        alpha = np.linalg.norm(d - np.outer(h, N[p]), axis=1) / r
        beta = h / r
        # bin centers: alpha at (i + 0.5)/na, beta at -1 + (j + 0.5) * 2/nb
        a0, a1, wa = linear_split(alpha * na - 0.5, na)
        b0, b1, wb = linear_split((beta + 1) * nb / 2 - 0.5, nb)
        m = A[idx]
        hist = np.zeros((na, nb))
        np.add.at(hist, (a0, b0), m * (1 - wa) * (1 - wb))
        np.add.at(hist, (a1, b0), m * wa * (1 - wb))
        np.add.at(hist, (a0, b1), m * (1 - wa) * wb)
        np.add.at(hist, (a1, b1), m * wa * wb)
        out[row] = hist.ravel() / hist.sum()
    if degenerate.any():
        logger.info("spin_image: %d features with empty support", int(degenerate.sum()))
    return DescriptorSet(out, feats.vertices, "spin-image", degenerate=degenerate, diagnostics={"empty_support": int(degenerate.sum())})
