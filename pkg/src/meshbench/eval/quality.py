"""Descriptor quality: normalized distances between descriptors at
corresponding points, ROC curves, and the dense variant."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ..descriptors.base import DescriptorSet
from ..mesh import TriMesh
from ..transforms.correspondence import CorrespondenceMap
from .config import DegeneratePopulation, EmptyEvaluableSet, NoMatches
from .points import feature_distance_matrix


def _check_dims(dx: DescriptorSet, dy: DescriptorSet, names=("X", "Y")):
    if dx.dim != dy.dim:
        raise ValueError(f"descriptor dimension mismatch: {names[0]} has {dx.dim}, {names[1]} has {dy.dim}")


@dataclass(frozen=True)
class QualityResult:
    rows: np.ndarray  # dy row index of each accepted pair
    matches: np.ndarray  # dx row index matched to it
    distances: np.ndarray  # normalized distances
    denominator: float

    @property
    def mean(self) -> float:
        return float(self.distances.mean())


def _normalizer(raw: np.ndarray, exclude: np.ndarray) -> float:
    """Mean raw distance over cross pairs not in ``exclude`` (boolean mask)."""
    keep = ~exclude
    if not keep.any():
        keep = np.ones_like(exclude)
    return float(raw[keep].mean())


def _divide(raw: np.ndarray, denom: float) -> np.ndarray:
    # identical descriptors everywhere: every distance is zero
    return np.zeros_like(raw) if denom == 0 else raw / denom


def pair_geometry(dx: DescriptorSet, dy: DescriptorSet, corr: CorrespondenceMap, null: TriMesh, rho: float):
    """Raw descriptor distances and geodesic distances over evaluable cross pairs.

    Returns (evaluable dy rows, raw[k, j], r[k, j]) with ``r`` capped at ``rho``.
    """
    ok = corr.valid[dy.vertices]
    rows = np.nonzero(ok)[0]
    if len(rows) == 0:
        raise EmptyEvaluableSet("no transformed descriptor row has groundtruth")
    raw = cdist(dy.matrix[rows], dx.matrix)
    r = feature_distance_matrix(dx.vertices, dy.vertices[rows], corr, null, cap=rho)
    return rows, raw, r


def descriptor_quality(dx: DescriptorSet, dy: DescriptorSet, corr: CorrespondenceMap, null: TriMesh, rho: float, names=("X", "Y")) -> QualityResult:
    """Normalized distance between each transformed descriptor and the descriptor
    of the closest null feature, accepted only when that feature lies within
    geodesic distance ``rho`` (strictly). The normalizer is the mean raw
    distance over all other cross pairs."""
    _check_dims(dx, dy, names)
    rows, raw, r = pair_geometry(dx, dy, corr, null, rho)
    if raw.shape[1] == 0:
        raise NoMatches("null shape has no descriptors")
    j = np.argmin(r, axis=1)
    acc = r[np.arange(len(rows)), j] < rho
    if not acc.any():
        raise NoMatches(f"no transformed feature has a null feature within rho={rho:g}")
    matched = np.zeros(raw.shape, dtype=bool)
    matched[np.nonzero(acc)[0], j[acc]] = True
    denom = _normalizer(raw, matched)
    d = _divide(raw[np.nonzero(acc)[0], j[acc]], denom)
    return QualityResult(rows[acc], j[acc], d, denom)


@dataclass(frozen=True)
class RocCurve:
    tau: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray

    def __post_init__(self):
        for a in (self.fpr, self.tpr):
            if np.any((a < 0) | (a > 1)) or np.any(np.diff(a) < 0):
                raise ValueError("ROC rates must lie in [0, 1] and be non-decreasing")


def default_tau(d: np.ndarray, points: int) -> np.ndarray:
    """Grid from 0 to the largest normalized distance."""
    hi = float(d.max()) if d.size else 1.0
    return np.linspace(0.0, hi if hi > 0 else 1.0, points)


def roc_from_distances(d: np.ndarray, positive: np.ndarray, tau) -> RocCurve:
    """TPR/FPR over pair populations split by ``positive`` (numerators
    restricted to their own population)."""
    tau = np.asarray(tau, dtype=np.float64)
    d, positive = np.ravel(d), np.ravel(positive)
    npos, nneg = int(positive.sum()), int((~positive).sum())
    if npos == 0 or nneg == 0:
        raise DegeneratePopulation(f"ROC needs both populations (positive={npos}, negative={nneg})")
    ds_p = np.sort(d[positive])
    ds_n = np.sort(d[~positive])
    tpr = np.searchsorted(ds_p, tau, side="right") / npos
    fpr = np.searchsorted(ds_n, tau, side="right") / nneg
    return RocCurve(tau, fpr, tpr)


def roc(dx: DescriptorSet, dy: DescriptorSet, corr: CorrespondenceMap, null: TriMesh, rho: float, tau=None, tau_points: int = 101, names=("X", "Y")) -> RocCurve:
    """ROC over all evaluable cross pairs: positives have ``r <= rho``.

    Distances are normalized as in :func:`descriptor_quality` (falling back
    to the mean over all pairs when nothing is accepted).
    """
    _check_dims(dx, dy, names)
    rows, raw, r = pair_geometry(dx, dy, corr, null, rho)
    if raw.shape[1] == 0:
        raise DegeneratePopulation("null shape has no descriptors")
    j = np.argmin(r, axis=1)
    acc = r[np.arange(len(rows)), j] < rho
    matched = np.zeros(raw.shape, dtype=bool)
    matched[np.nonzero(acc)[0], j[acc]] = True
    d = _divide(raw, _normalizer(raw, matched))
    grid = default_tau(d, tau_points) if tau is None else tau
    return roc_from_distances(d, r <= rho, grid)


def dense_quality(dx: DescriptorSet, dy: DescriptorSet, corr: CorrespondenceMap, null: TriMesh | None = None, pairs: int = 2000, exact_limit: int = 1_000_000, seed: int = 0, exact: bool | None = None) -> float:
    """Mean normalized distance between dense descriptors at corresponding vertices.

    Barycentric references interpolate the null descriptors over the face
    (``null`` is then required). The normalizer is the mean distance over
    non-corresponding pairs: exact when the pair count is at most
    ``exact_limit`` (or ``exact=True``), otherwise estimated from ``pairs``
    seeded random pairs.
    """
    _check_dims(dx, dy)
    if len(dy) != len(corr):
        raise ValueError("dense descriptor rows do not match the correspondence length")
    rows = np.nonzero(corr.valid)[0]
    if len(rows) == 0:
        raise EmptyEvaluableSet("no transformed vertex has groundtruth")
    v, f = corr.vertex[rows], corr.face[rows]
    g = np.zeros((len(rows), dx.dim))
    vb = v >= 0
    g[vb] = dx.matrix[v[vb]]
    if (~vb).any():
        if null is None:
            raise ValueError("barycentric correspondences need the null mesh")
        g[~vb] = np.einsum("ij,ijk->ik", corr.bary[rows[~vb]], dx.matrix[null.faces[f[~vb]]])
    num = np.linalg.norm(dy.matrix[rows] - g, axis=1)
    partner = corr.nearest_vertex(null) if null is not None else corr.vertex
    partner = partner[rows]
    nx = len(dx)
    use_exact = exact if exact is not None else len(rows) * nx <= exact_limit
    if use_exact:
        raw = cdist(dy.matrix[rows], dx.matrix)
        mask = np.zeros(raw.shape, dtype=bool)
        mask[np.arange(len(rows)), partner] = True
        denom = _normalizer(raw, mask)
    else:
        rng = np.random.default_rng(seed)
        k = rng.integers(0, len(rows), pairs)
        j = rng.integers(0, nx, pairs)
        keep = j != partner[k]
        k, j = k[keep], j[keep]
        denom = float(np.linalg.norm(dy.matrix[rows[k]] - dx.matrix[j], axis=1).mean())
    return float(_divide(num, denom).mean())
