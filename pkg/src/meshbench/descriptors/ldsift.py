"""Local Depth SIFT: SIFT histogram of a depth map rendered on the tangent plane."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..detectors.features import FeaturePoints
from ..mesh import TriMesh
from .base import DescriptorSet
from .common import SUPPORT_MULTIPLIER, circular_split, feature_scales, linear_split, supports

logger = logging.getLogger(__name__)

RANK_TOL = 1e-10
CLAMP = 0.2
_CHUNK = 512


@dataclass(frozen=True)
class LdSiftConfig:
    grid: int = 32
    cells: int = 4
    orientations: int = 8
    multiplier: float = SUPPORT_MULTIPLIER  # support radius and viewport side, in scales
    fallback_scale: float | None = None

    def __post_init__(self):
        if self.grid % self.cells:
            raise ValueError("grid side must be a multiple of the cell count")
        if self.orientations < 2:
            raise ValueError("need at least 2 orientation bins")


def _frame(points: np.ndarray, weights: np.ndarray, normal_hint: np.ndarray):
    """PCA plane normal (sign from ``normal_hint``); None if the support is rank deficient."""
    c = np.average(points, axis=0, weights=weights)
    d = points - c
    cov = (d * weights[:, None]).T @ d
    lam, vecs = np.linalg.eigh(cov)
    if lam[1] <= RANK_TOL * max(lam[2], 1e-300):
        return None
    n = vecs[:, 0]
    return n if n @ normal_hint >= 0 else -n


def _tangent_basis(n: np.ndarray) -> np.ndarray:
    a = np.eye(3)[np.argmin(np.abs(n))]
    e1 = np.cross(n, a)
    e1 /= np.linalg.norm(e1)
    return np.column_stack([e1, np.cross(n, e1)])


def rasterize(uv: np.ndarray, depth: np.ndarray, tris: np.ndarray, side: float, grid: int) -> tuple[np.ndarray, np.ndarray]:
    """Depth map over the square ``[-side/2, side/2]^2``; returns (map, covered mask).

    Where triangles overlap the pixel keeps the largest depth.
    """
    c = (np.arange(grid) + 0.5) / grid * side - side / 2
    px, py = np.meshgrid(c, c, indexing="xy")  # row = y, column = x
    P = np.column_stack([px.ravel(), py.ravel()])
    img = np.full(len(P), -np.inf)
    for s in range(0, len(tris), _CHUNK):
        t = tris[s : s + _CHUNK]
        a, b, cc = uv[t[:, 0]], uv[t[:, 1]], uv[t[:, 2]]
        v0, v1 = b - a, cc - a
        den = v0[:, 0] * v1[:, 1] - v0[:, 1] * v1[:, 0]
        ok = np.abs(den) > 1e-300
        a, v0, v1, den, t = a[ok], v0[ok], v1[ok], den[ok], t[ok]
        w = P[:, None, :] - a[None, :, :]
        l1 = (w[..., 0] * v1[:, 1] - w[..., 1] * v1[:, 0]) / den
        l2 = (v0[:, 0] * w[..., 1] - v0[:, 1] * w[..., 0]) / den
        l0 = 1 - l1 - l2
        eps = -1e-12
        inside = (l0 >= eps) & (l1 >= eps) & (l2 >= eps)
        z = l0 * depth[t[:, 0]] + l1 * depth[t[:, 1]] + l2 * depth[t[:, 2]]
        z = np.where(inside, z, -np.inf)
        img = np.maximum(img, z.max(axis=1))
    covered = np.isfinite(img).reshape(grid, grid)
    img = img.reshape(grid, grid)
    if not covered.any():
        return np.zeros((grid, grid)), covered
    # uncovered pixels take the nearest covered value
    _, (ri, ci) = ndimage.distance_transform_edt(~covered, return_indices=True)
    return img[ri, ci], covered


def sift_histogram(img: np.ndarray, cells: int, orientations: int) -> np.ndarray:
    """Gradient-orientation histogram with Gaussian spatial weighting and
    trilinear binning, normalized, clamped at 0.2 and renormalized."""
    g = img.shape[0]
    gy, gx = np.gradient(img)
    mag = np.hypot(gx, gy)
    theta = np.arctan2(gy, gx)
    c = np.arange(g) + 0.5 - g / 2
    yy, xx = np.meshgrid(c, c, indexing="ij")
    sigma = g / 2
    w = mag * np.exp(-(xx**2 + yy**2) / (2 * sigma**2))
    cw = g / cells
    x0, x1, wx = linear_split((xx + g / 2) / cw - 0.5, cells)
    y0, y1, wy = linear_split((yy + g / 2) / cw - 0.5, cells)
    o0, o1, wo = circular_split(theta, orientations)
    hist = np.zeros((cells, cells, orientations))
    for yi, fy in ((y0, 1 - wy), (y1, wy)):
        for xi, fx in ((x0, 1 - wx), (x1, wx)):
            for oi, fo in ((o0, 1 - wo), (o1, wo)):
                np.add.at(hist, (yi, xi, oi), w * fy * fx * fo)
    h = hist.ravel()
    nrm = np.linalg.norm(h)
    if nrm <= 0:
        return h
    h = np.minimum(h / nrm, CLAMP)
    return h / np.linalg.norm(h)


def local_depth_sift(mesh: TriMesh, feats: FeaturePoints, config: LdSiftConfig | None = None, **kw) -> DescriptorSet:
    """LD-SIFT descriptors (d = cells^2 * orientations, 128 by default).

    Features whose support is collinear are dropped (``diagnostics["dropped"]``);
    features with a constant depth map get a zero row flagged degenerate.
    """
    cfg = config or LdSiftConfig(**kw)
    side_scale = cfg.multiplier * feature_scales(mesh, feats, cfg.fallback_scale)
    sup = supports(mesh, feats.vertices, side_scale)
    V, F, A, N = mesh.vertices, mesh.faces, mesh.vertex_areas, mesh.normals
    in_sup = np.zeros(mesh.n_vertices, dtype=bool)
    rows, kept, degenerate = [], [], []
    dropped = 0
    for p, side, idx in zip(feats.vertices, side_scale, sup):
        n = _frame(V[idx], A[idx], N[p]) if len(idx) >= 3 else None
        if n is None:
            dropped += 1
            continue
        d = V[idx] - V[p]
        depth = d @ n
        uv = d @ _tangent_basis(n)
        # dominant direction of the projected support weighted by relief
        # |depth - median depth| (a round support projects isotropically);
        # sign toward the half-plane with the larger relief mass
        side_mass = np.abs(depth - np.median(depth)) * A[idx]
        w = side_mass if side_mass.sum() > 1e-12 * side * A[idx].sum() else A[idx]
        _, ev = np.linalg.eigh((uv * w[:, None]).T @ uv)
        axis = ev[:, 1]
        proj = uv @ axis
        if side_mass[proj > 0].sum() < side_mass[proj < 0].sum():
            axis = -axis
        rot = np.array([[axis[0], axis[1]], [-axis[1], axis[0]]])
        uv = uv @ rot.T
        in_sup[idx] = True
        local = np.full(mesh.n_vertices, -1)
        local[idx] = np.arange(len(idx))
        tris = local[F[in_sup[F].all(axis=1)]]
        in_sup[idx] = False
        img, _ = rasterize(uv, depth, tris, side, cfg.grid)
        h = sift_histogram(img, cfg.cells, cfg.orientations)
        rows.append(h)
        kept.append(p)
        degenerate.append(not h.any())
    dim = cfg.cells * cfg.cells * cfg.orientations
    mat = np.array(rows) if rows else np.zeros((0, dim))
    diag = {"dropped": dropped, "zero_gradient": int(sum(degenerate))}
    if dropped:
        logger.info("local_depth_sift: %d features dropped (rank-deficient support)", dropped)
    return DescriptorSet(mat, np.array(kept, dtype=np.int64), "ld-sift", degenerate=np.array(degenerate, dtype=bool), diagnostics=diag)
