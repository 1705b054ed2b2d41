"""Approximate geodesic distances: Dijkstra on edges plus unfolded face-pair shortcuts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import dijkstra

from .mesh import TriMesh


@dataclass(frozen=True, eq=False)
class GeodesicField:
    sources: np.ndarray
    distances: np.ndarray
    cap: float | None = None


def _unfold_shortcuts(mesh: TriMesh) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Straight-line shortcuts across each interior edge.

    For an edge (u, w) shared by faces (u, w, a) and (w, u, b) the two faces
    are unfolded into a plane; the segment a-b is kept when it crosses the
    edge, i.e. when the unfolded quad is convex at u and w.
    """
    v, f = mesh.vertices, mesh.faces
    he = np.concatenate([f[:, [0, 1, 2]], f[:, [1, 2, 0]], f[:, [2, 0, 1]]])
    key = np.sort(he[:, :2], axis=1)
    order = np.lexsort((key[:, 1], key[:, 0]))
    key, he = key[order], he[order]
    starts = np.flatnonzero(np.r_[True, np.any(key[1:] != key[:-1], axis=1)])
    counts = np.diff(np.r_[starts, len(key)])
    first = starts[counts == 2]
    h1, h2 = he[first], he[first + 1]
    u, w, a = h1[:, 0], h1[:, 1], h1[:, 2]
    b = h2[:, 2]
    pu, pw, pa, pb = v[u], v[w], v[a], v[b]
    e = pw - pu
    elen = np.linalg.norm(e, axis=1)
    ok = elen > 0
    ex = np.divide(e, elen[:, None], out=np.zeros_like(e), where=ok[:, None])

    def planar(p):
        d = p - pu
        x = np.einsum("ij,ij->i", d, ex)
        y = np.linalg.norm(d - x[:, None] * ex, axis=1)
        return x, y

    ax, ay = planar(pa)
    bx, by = planar(pb)
    by = -by
    denom = ay - by
    good = ok & (denom > 0)
    t = np.divide(ay, denom, out=np.zeros_like(ay), where=good)
    xc = ax + t * (bx - ax)
    good &= (xc >= 0) & (xc <= elen)
    length = np.hypot(ax - bx, ay - by)
    return a[good], b[good], length[good]


def geodesic_graph(mesh: TriMesh) -> sparse.csr_matrix:
    """Symmetric weighted graph used for all geodesic queries on ``mesh``.

    Built once per mesh and stored on the instance.
    """
    g = mesh.__dict__.get("_geodesic_graph")
    if g is not None:
        return g
    e = mesh.edges
    a, b, length = _unfold_shortcuts(mesh)
    i = np.concatenate([e[:, 0], a])
    j = np.concatenate([e[:, 1], b])
    w = np.concatenate([mesh.edge_lengths, length])
    lo, hi = np.minimum(i, j), np.maximum(i, j)
    order = np.lexsort((w, hi, lo))
    lo, hi, w = lo[order], hi[order], w[order]
    keep = np.ones(len(lo), dtype=bool)
    keep[1:] = (lo[1:] != lo[:-1]) | (hi[1:] != hi[:-1])
    lo, hi, w = lo[keep], hi[keep], w[keep]
    # zero-length edges would vanish from the sparse graph
    w = np.maximum(w, 1e-300)
    n = mesh.n_vertices
    g = sparse.coo_matrix((np.r_[w, w], (np.r_[lo, hi], np.r_[hi, lo])), shape=(n, n)).tocsr()
    mesh.__dict__["_geodesic_graph"] = g
    return g


def geodesic_distances(mesh: TriMesh, sources, cap: float | None = None) -> GeodesicField:
    """Distance from the nearest source to every vertex.

    Values beyond ``cap`` are reported as ``inf``.
    """
    src = np.unique(np.atleast_1d(np.asarray(sources, dtype=np.int64)))
    if len(src) == 0:
        raise ValueError("empty source set")
    limit = np.inf if cap is None else float(cap)
    d = dijkstra(geodesic_graph(mesh), directed=False, indices=src, min_only=True, limit=limit)
    return GeodesicField(src, d, cap)


def pairwise_geodesics(mesh: TriMesh, sources, cap: float | None = None) -> np.ndarray:
    """Per-source distances, shape (len(sources), n_vertices)."""
    src = np.atleast_1d(np.asarray(sources, dtype=np.int64))
    limit = np.inf if cap is None else float(cap)
    return np.atleast_2d(dijkstra(geodesic_graph(mesh), directed=False, indices=src, limit=limit))
