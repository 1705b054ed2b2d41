"""Quadric-error half-edge collapse decimation.

Collapsing u into v keeps v at its original position, so every output vertex
is an input vertex and the correspondence is a plain index map.
"""

from __future__ import annotations

import heapq

import numpy as np

from ..mesh import TriMesh

FLIP_COS = 0.1


class DecimationError(RuntimeError):
    def __init__(self, message: str, achieved_fraction: float):
        super().__init__(f"{message} (achieved fraction {achieved_fraction:.4f})")
        self.achieved_fraction = achieved_fraction


def _face_quadrics(p: np.ndarray, faces: np.ndarray) -> np.ndarray:
    a, b, c = p[faces[:, 0]], p[faces[:, 1]], p[faces[:, 2]]
    cr = np.cross(b - a, c - a)
    area2 = np.linalg.norm(cr, axis=1)
    n = np.divide(cr, area2[:, None], out=np.zeros_like(cr), where=area2[:, None] > 0)
    plane = np.column_stack([n, -np.einsum("ij,ij->i", n, a)])
    return 0.5 * area2[:, None, None] * plane[:, :, None] * plane[:, None, :]


class _Decimator:
    def __init__(self, mesh: TriMesh):
        self.p = mesh.vertices
        self.faces = [list(map(int, f)) for f in mesh.faces]
        self.face_alive = [True] * len(self.faces)
        n = mesh.n_vertices
        self.vfaces: list[set[int]] = [set() for _ in range(n)]
        for fi, f in enumerate(self.faces):
            for x in f:
                self.vfaces[x].add(fi)
        self.alive = np.ones(n, dtype=bool)
        self.version = [0] * n
        fq = _face_quadrics(self.p, mesh.faces)
        self.Q = np.zeros((n, 4, 4))
        np.add.at(self.Q, mesh.faces.ravel(), np.repeat(fq, 3, axis=0))
        self.hp = np.column_stack([self.p, np.ones(n)])
        self.heap: list = []
        for u, v in mesh.edges:
            self._push(int(u), int(v))

    def neighbors(self, u: int) -> set[int]:
        out = set()
        for fi in self.vfaces[u]:
            out.update(self.faces[fi])
        out.discard(u)
        return out

    def _is_boundary_edge(self, u: int, v: int) -> bool:
        return len(self.vfaces[u] & self.vfaces[v]) == 1

    def _is_boundary_vertex(self, u: int) -> bool:
        return any(self._is_boundary_edge(u, w) for w in self.neighbors(u))

    def _cost(self, u: int, v: int) -> float:
        q = self.Q[u] + self.Q[v]
        h = self.hp[v]
        return float(h @ q @ h)

    def _push(self, u: int, v: int):
        for a, b in ((u, v), (v, u)):
            heapq.heappush(self.heap, (self._cost(a, b), a, b, self.version[a], self.version[b]))

    def _valid(self, u: int, v: int) -> bool:
        shared = self.vfaces[u] & self.vfaces[v]
        if not shared:
            return False
        opposite = set()
        for fi in shared:
            opposite.update(self.faces[fi])
        opposite -= {u, v}
        if self.neighbors(u) & self.neighbors(v) != opposite:
            return False
        # a boundary vertex may only slide along its boundary
        if len(shared) > 1 and self._is_boundary_vertex(u):
            return False
        if len(self.vfaces[u] | self.vfaces[v]) - len(shared) < 2:
            return False
        pv = self.p[v]
        for fi in self.vfaces[u] - shared:
            f = self.faces[fi]
            a, b, c = (self.p[x] for x in f)
            n0 = np.cross(b - a, c - a)
            g = [pv if x == u else self.p[x] for x in f]
            n1 = np.cross(g[1] - g[0], g[2] - g[0])
            l0, l1 = np.linalg.norm(n0), np.linalg.norm(n1)
            if l1 <= 0 or l0 <= 0 or n0 @ n1 <= FLIP_COS * l0 * l1:
                return False
        return True

    def collapse(self, u: int, v: int):
        shared = self.vfaces[u] & self.vfaces[v]
        for fi in shared:
            self.face_alive[fi] = False
            for x in self.faces[fi]:
                self.vfaces[x].discard(fi)
        for fi in list(self.vfaces[u]):
            f = self.faces[fi]
            f[f.index(u)] = v
            self.vfaces[v].add(fi)
        self.vfaces[u].clear()
        self.alive[u] = False
        self.Q[v] += self.Q[u]
        self.version[v] += 1
        for w in self.neighbors(v):
            self._push(v, w)

    def run(self, target: int) -> int:
        count = int(self.alive.sum())
        while count > target and self.heap:
            _, u, v, vu, vv = heapq.heappop(self.heap)
            if not (self.alive[u] and self.alive[v]):
                continue
            if vu != self.version[u] or vv != self.version[v]:
                continue
            if not self._valid(u, v):
                continue
            self.collapse(u, v)
            count -= 1
        return count


def decimate(mesh: TriMesh, fraction: float) -> tuple[TriMesh, np.ndarray]:
    """Collapse edges until at most ``fraction`` of the vertices remain.

    Returns the decimated mesh and the input index of each output vertex.
    """
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    target = int(np.floor(fraction * mesh.n_vertices))
    dec = _Decimator(mesh)
    count = dec.run(target)
    if count > target:
        raise DecimationError(f"could not reach {target} vertices", count / mesh.n_vertices)
    faces = np.array([f for f, ok in zip(dec.faces, dec.face_alive) if ok], dtype=np.int64)
    old = np.unique(faces.ravel())
    remap = np.full(mesh.n_vertices, -1, dtype=np.int64)
    remap[old] = np.arange(len(old))
    return TriMesh(mesh.vertices[old], remap[faces], name=mesh.name), old
