"""Region repeatability by area-weighted overlap (Jaccard) of vertex sets."""

from __future__ import annotations

import numpy as np
from scipy import sparse

from ..detectors.features import FeatureRegions
from ..mesh import TriMesh
from ..transforms.correspondence import CorrespondenceMap
from .config import EmptyEvaluableSet


def overlap(a: np.ndarray, b: np.ndarray, areas: np.ndarray) -> float:
    """Area of intersection over area of union of two vertex sets."""
    a, b = np.unique(a), np.unique(b)
    union = areas[np.union1d(a, b)].sum()
    if union <= 0:
        return 0.0
    return float(areas[np.intersect1d(a, b, assume_unique=True)].sum() / union)


def map_regions(ry: FeatureRegions, corr: CorrespondenceMap, null: TriMesh) -> tuple[list[np.ndarray], int]:
    """Transformed regions carried to the null shape; empty ones are dropped
    and counted."""
    target = corr.nearest_vertex(null)
    mapped, lost = [], 0
    for reg in ry.regions:
        m = np.unique(target[reg])
        m = m[m >= 0]
        if len(m):
            mapped.append(m)
        else:
            lost += 1
    return mapped, lost


def overlap_matrix(mapped: list[np.ndarray], rx: FeatureRegions, areas: np.ndarray) -> np.ndarray:
    n = len(areas)

    def indicator(regs):
        rows = np.concatenate([np.full(len(r), i) for i, r in enumerate(regs)]) if regs else np.zeros(0, int)
        cols = np.concatenate(regs) if regs else np.zeros(0, int)
        return sparse.csr_matrix((np.ones(len(cols)), (rows, cols)), shape=(len(regs), n))

    # sparse product finds intersecting pairs; values come from exact set sums
    # so that coinciding sets give exactly 1
    A, B = indicator(mapped), indicator(list(rx.regions))
    hits = (A @ B.T).tocoo()
    O = np.zeros((len(mapped), len(rx.regions)))
    for i, j in zip(hits.row, hits.col):
        O[i, j] = overlap(mapped[i], rx.regions[j], areas)
    return O


def greedy_assignment(O: np.ndarray) -> np.ndarray:
    """One-to-one pairing by descending overlap (ties: lower row, then lower
    column). Returns the assigned overlap per row (0 if unassigned)."""
    best = np.zeros(O.shape[0])
    if O.size == 0:
        return best
    r, c = np.nonzero(O > 0)
    order = np.lexsort((c, r, -O[r, c]))
    used_r = np.zeros(O.shape[0], dtype=bool)
    used_c = np.zeros(O.shape[1], dtype=bool)
    for i in order:
        a, b = r[i], c[i]
        if used_r[a] or used_c[b]:
            continue
        used_r[a] = used_c[b] = True
        best[a] = O[a, b]
    return best


def region_overlaps(rx: FeatureRegions, ry: FeatureRegions, corr: CorrespondenceMap, null: TriMesh) -> tuple[np.ndarray, dict]:
    mapped, lost = map_regions(ry, corr, null)
    if not mapped:
        raise EmptyEvaluableSet("every transformed region maps to an empty set")
    best = greedy_assignment(overlap_matrix(mapped, rx, null.vertex_areas))
    return best, {"evaluated": len(mapped), "empty_mapped": lost}


def region_repeatability(rx: FeatureRegions, ry: FeatureRegions, corr: CorrespondenceMap, null: TriMesh, threshold: float = 0.7) -> float:
    """Percentage of transformed regions whose assigned null region overlaps
    at least ``threshold``."""
    if not 0 < threshold <= 1:
        raise ValueError("overlap threshold must be in (0, 1]")
    best, _ = region_overlaps(rx, ry, corr, null)
    return 100.0 * float(np.mean(best >= threshold))


def repeatability_vs_overlap(rx: FeatureRegions, ry: FeatureRegions, corr: CorrespondenceMap, null: TriMesh, thresholds) -> np.ndarray:
    t = np.asarray(thresholds, dtype=np.float64)
    best, _ = region_overlaps(rx, ry, corr, null)
    return 100.0 * (best[None, :] >= t[:, None]).mean(axis=1)
