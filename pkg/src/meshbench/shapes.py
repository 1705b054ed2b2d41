"""Procedural meshes used as test shapes and synthetic null shapes."""

from __future__ import annotations

import numpy as np

from .mesh import TriMesh


def icosphere(subdivisions: int = 3, radius: float = 1.0) -> TriMesh:
    t = (1.0 + 5**0.5) / 2.0
    v = [
        (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
        (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
        (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
    ]
    f = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [np.array(p, dtype=float) / np.linalg.norm(p) for p in v]
    faces = f
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def mid(a, b):
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        nf = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            nf += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = nf
    return TriMesh(radius * np.array(verts), np.array(faces), name="icosphere")


def grid(nx: int = 10, ny: int | None = None, spacing: float = 1.0, height=None) -> TriMesh:
    """Planar ``nx`` x ``ny`` vertex grid, row-major, split along one diagonal.

    ``height`` is an optional callable ``z = height(x, y)``.
    """
    ny = nx if ny is None else ny
    xs, ys = np.meshgrid(np.arange(nx) * spacing, np.arange(ny) * spacing)
    x, y = xs.ravel(), ys.ravel()
    z = np.zeros_like(x) if height is None else height(x, y)
    faces = []
    for j in range(ny - 1):
        for i in range(nx - 1):
            a = j * nx + i
            b, c, d = a + 1, a + nx, a + nx + 1
            faces += [(a, b, d), (a, d, c)]
    return TriMesh(np.column_stack([x, y, z]), np.array(faces), name="grid")


def tetrahedron(edge: float = 1.0) -> TriMesh:
    v = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    v *= edge / np.linalg.norm(v[0] - v[1])
    f = np.array([[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]])
    return TriMesh(v, f, name="tetrahedron")


def bump_plane(n: int = 21, amplitude: float = 2.0, width: float = 2.0) -> tuple[TriMesh, int]:
    """Unit-spaced grid with a Gaussian bump; returns the mesh and apex vertex."""
    c = (n - 1) / 2.0

    def h(x, y):
        return amplitude * np.exp(-((x - c) ** 2 + (y - c) ** 2) / (2 * width**2))

    mesh = grid(n, height=h)
    apex = int(round(c)) * n + int(round(c))
    return mesh, apex


def blob(subdivisions: int = 5, n_bumps: int = 12, seed: int = 0, radius: float = 1.0) -> TriMesh:
    """Icosphere radially displaced by smooth random bumps.

    Gives an asymmetric closed surface with distinct curvature features;
    subdivision 5 has 10,242 vertices.
    """
    rng = np.random.default_rng(seed)
    s = icosphere(subdivisions)
    p = s.vertices
    centers = rng.normal(size=(n_bumps, 3))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    heights = rng.uniform(-0.15, 0.35, size=n_bumps)
    widths = rng.uniform(0.2, 0.45, size=n_bumps)
    r = np.ones(len(p))
    for c, h, w in zip(centers, heights, widths):
        ang = np.arccos(np.clip(p @ c, -1, 1))
        r += h * np.exp(-(ang**2) / (2 * w**2))
    stretch = np.array([1.0, 0.8, 1.3])
    return TriMesh(radius * p * r[:, None] * stretch, s.faces, name="blob")


def spiky_blob(subdivisions: int = 5, n_spikes: int = 150, seed: int = 0, radius: float = 1.0) -> TriMesh:
    """Icosphere with many narrow protrusions (corner-like features a few
    edges wide), stretched like :func:`blob`."""
    rng = np.random.default_rng(seed)
    s = icosphere(subdivisions)
    p = s.vertices
    centers = rng.normal(size=(n_spikes, 3))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    heights = rng.uniform(0.05, 0.2, size=n_spikes)
    widths = rng.uniform(0.03, 0.06, size=n_spikes)
    r = np.ones(len(p))
    for c, h, w in zip(centers, heights, widths):
        ang = np.arccos(np.clip(p @ c, -1, 1))
        r += h * np.exp(-(ang**2) / (2 * w**2))
    stretch = np.array([1.0, 0.8, 1.3])
    return TriMesh(radius * p * r[:, None] * stretch, s.faces, name="spiky")


def random_rotation(seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q
