"""Cotangent Laplacian and discrete curvature estimators."""

from __future__ import annotations

import logging

import numpy as np
from scipy import sparse

from .mesh import ScalarField, TriMesh

logger = logging.getLogger(__name__)

COT_MIN = 1e-6
COT_MAX = 1e6


def corner_cotangents(mesh: TriMesh) -> np.ndarray:
    """Clamped cotangent of each face corner, shape (m, 3).

    Column k is the angle at ``faces[:, k]``. Degenerate (zero-area) faces
    get zero for all three corners.
    """
    v, f = mesh.vertices, mesh.faces
    cots = np.zeros(f.shape)
    area2 = 2.0 * mesh.face_areas
    ok = area2 > 0
    for k in range(3):
        a = v[f[:, (k + 1) % 3]] - v[f[:, k]]
        b = v[f[:, (k + 2) % 3]] - v[f[:, k]]
        dot = np.einsum("ij,ij->i", a, b)
        c = np.divide(dot, area2, out=np.zeros_like(dot), where=ok)
        cots[:, k] = np.where(ok, np.clip(c, COT_MIN, COT_MAX), 0.0)
    return cots


def corner_angles(mesh: TriMesh) -> np.ndarray:
    v, f = mesh.vertices, mesh.faces
    ang = np.zeros(f.shape)
    for k in range(3):
        a = v[f[:, (k + 1) % 3]] - v[f[:, k]]
        b = v[f[:, (k + 2) % 3]] - v[f[:, k]]
        cross = np.linalg.norm(np.cross(a, b), axis=1)
        ang[:, k] = np.arctan2(cross, np.einsum("ij,ij->i", a, b))
    return ang


def cotangent_laplacian(mesh: TriMesh) -> tuple[sparse.csr_matrix, np.ndarray]:
    """Stiffness matrix ``W`` and lumped (barycentric) mass diagonal.

    ``W`` is symmetric positive semi-definite: the off-diagonal entry of edge
    (i, j) is ``-(cot a + cot b) / 2`` and every row sums to zero.
    """
    n = mesh.n_vertices
    f = mesh.faces
    cots = corner_cotangents(mesh)
    rows, cols, vals = [], [], []
    for k in range(3):
        i, j = f[:, (k + 1) % 3], f[:, (k + 2) % 3]
        w = 0.5 * cots[:, k]
        rows += [i, j]
        cols += [j, i]
        vals += [-w, -w]
    rows, cols, vals = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    off = sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    diag = -np.asarray(off.sum(axis=1)).ravel()
    W = (off + sparse.diags(diag)).tocsr()
    W.sort_indices()
    return W, mesh.vertex_areas.copy()


def mixed_areas(mesh: TriMesh) -> np.ndarray:
    """Mixed Voronoi vertex areas of Meyer et al., used to normalize curvature.

    Non-obtuse triangles contribute their Voronoi regions; obtuse triangles
    give half their area to the obtuse corner and a quarter to the others.
    """
    v, f = mesh.vertices, mesh.faces
    ang = corner_angles(mesh)
    area = mesh.face_areas
    cots = corner_cotangents(mesh)
    out = np.zeros(mesh.n_vertices)
    obtuse = ang > np.pi / 2
    any_obtuse = obtuse.any(axis=1)
    for k in range(3):
        i, j, l = f[:, k], f[:, (k + 1) % 3], f[:, (k + 2) % 3]
        # edge (k, j) is opposite corner l, edge (k, l) opposite corner j
        e_kj = np.sum((v[j] - v[i]) ** 2, axis=1)
        e_kl = np.sum((v[l] - v[i]) ** 2, axis=1)
        vor = (e_kj * cots[:, (k + 2) % 3] + e_kl * cots[:, (k + 1) % 3]) / 8.0
        contrib = np.where(any_obtuse, np.where(obtuse[:, k], area / 2, area / 4), vor)
        np.add.at(out, i, contrib)
    return out


def _manifold_vertices(mesh: TriMesh) -> np.ndarray:
    """Vertices whose incident edges are each shared by one or two faces."""
    f = mesh.faces
    e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
    e.sort(axis=1)
    uniq, counts = np.unique(e, axis=0, return_counts=True)
    bad = np.zeros(mesh.n_vertices, dtype=bool)
    bad[uniq[counts > 2].ravel()] = True
    return ~bad


def mean_curvature(mesh: TriMesh) -> ScalarField:
    """Signed mean curvature from the cotangent Laplacian of the positions.

    Positive on convex regions with outward normals. Vertices touching a
    non-manifold edge get 0 and are counted in a warning.
    """
    W, _ = cotangent_laplacian(mesh)
    area = mixed_areas(mesh)
    lap = -(W @ mesh.vertices) / area[:, None]
    h = 0.5 * np.linalg.norm(lap, axis=1)
    sign = np.where(np.einsum("ij,ij->i", lap, mesh.normals) > 0, -1.0, 1.0)
    h = sign * h
    h[mesh.boundary_vertices] = 0.0
    ok = _manifold_vertices(mesh)
    if not ok.all():
        logger.warning("mean_curvature: %d non-manifold vertices set to 0", int((~ok).sum()))
        h[~ok] = 0.0
    return ScalarField(h, "mean-curvature")


def gaussian_curvature(mesh: TriMesh) -> ScalarField:
    """Angle-deficit Gaussian curvature divided by the mixed vertex area."""
    ang = corner_angles(mesh)
    total = np.zeros(mesh.n_vertices)
    np.add.at(total, mesh.faces.ravel(), ang.ravel())
    full = np.where(mesh.boundary_vertices, np.pi, 2 * np.pi)
    k = (full - total) / mixed_areas(mesh)
    ok = _manifold_vertices(mesh)
    if not ok.all():
        logger.warning("gaussian_curvature: %d non-manifold vertices set to 0", int((~ok).sum()))
        k[~ok] = 0.0
    return ScalarField(k, "gaussian-curvature")
