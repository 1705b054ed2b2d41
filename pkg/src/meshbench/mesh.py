"""Indexed triangle meshes and their ASCII OFF/PLY readers and writers."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import sparse

logger = logging.getLogger(__name__)

FIELD_KINDS = ("mean-curvature", "gaussian-curvature", "hks-diagonal", "custom")


class MeshError(ValueError):
    """Raised for malformed mesh files or invalid mesh arrays."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Triangle mesh with lazily derived adjacency and area data.

    Parameters
    ----------
    vertices : (n, 3) float array
    faces : (m, 3) int array of vertex indices

    Derived quantities (``rings``, ``vertex_areas``, ``normals``, ``diam``...)
    are computed on first access and cached. Arrays are read-only, so a mesh
    can be shared between workers.
    """

    vertices: np.ndarray
    faces: np.ndarray
    name: str = field(default="mesh", compare=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64)
        f = np.array(self.faces, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3 or len(v) == 0:
            raise MeshError("vertices must be a non-empty (n, 3) array")
        if f.ndim != 2 or f.shape[1] != 3 or len(f) == 0:
            raise MeshError("faces must be a non-empty (m, 3) array")
        if f.min() < 0 or f.max() >= len(v):
            raise MeshError("face index out of range")
        if np.any((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])):
            raise MeshError("degenerate face with repeated vertex index")
        if not np.all(np.isfinite(v)):
            raise MeshError("non-finite vertex coordinates")
        used = np.zeros(len(v), dtype=bool)
        used[f.ravel()] = True
        if not used.all():
            raise MeshError(f"{int((~used).sum())} vertices are not referenced by any face")
        object.__setattr__(self, "vertices", _frozen(v))
        object.__setattr__(self, "faces", _frozen(f))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    # -- derived geometry -------------------------------------------------

    @cached_property
    def face_areas(self) -> np.ndarray:
        return _frozen(0.5 * np.linalg.norm(self._face_cross, axis=1))

    @cached_property
    def _face_cross(self) -> np.ndarray:
        v, f = self.vertices, self.faces
        return np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])

    @cached_property
    def face_normals(self) -> np.ndarray:
        c = self._face_cross
        n = np.linalg.norm(c, axis=1, keepdims=True)
        return _frozen(np.divide(c, n, out=np.zeros_like(c), where=n > 0))

    @cached_property
    def vertex_areas(self) -> np.ndarray:
        """Barycentric vertex areas: one third of each incident face area."""
        a = np.zeros(self.n_vertices)
        np.add.at(a, self.faces.ravel(), np.repeat(self.face_areas / 3.0, 3))
        return _frozen(a)

    @property
    def total_area(self) -> float:
        return float(self.face_areas.sum())

    @cached_property
    def normals(self) -> np.ndarray:
        """Unit vertex normals from area-weighted face normals."""
        n = np.zeros((self.n_vertices, 3))
        for k in range(3):
            np.add.at(n, self.faces[:, k], self._face_cross)
        norm = np.linalg.norm(n, axis=1, keepdims=True)
        return _frozen(np.divide(n, norm, out=np.zeros_like(n), where=norm > 0))

    @cached_property
    def diam(self) -> float:
        """Euclidean bounding-box diagonal."""
        return float(np.linalg.norm(self.vertices.max(0) - self.vertices.min(0)))

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique undirected edges as sorted (i, j) pairs, i < j."""
        f = self.faces
        e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        e.sort(axis=1)
        return _frozen(np.unique(e, axis=0))

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        v = self.vertices
        return _frozen(np.linalg.norm(v[self.edges[:, 0]] - v[self.edges[:, 1]], axis=1))

    @cached_property
    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric 0/1 vertex adjacency."""
        e = self.edges
        n = self.n_vertices
        data = np.ones(2 * len(e))
        a = sparse.coo_matrix(
            (data, (np.r_[e[:, 0], e[:, 1]], np.r_[e[:, 1], e[:, 0]])), shape=(n, n)
        ).tocsr()
        a.sort_indices()
        return a

    @cached_property
    def rings(self) -> list[np.ndarray]:
        """One-ring neighbor indices of each vertex, ascending."""
        a = self.adjacency
        return [a.indices[a.indptr[i] : a.indptr[i + 1]] for i in range(self.n_vertices)]

    def k_ring(self, v: int, k: int) -> np.ndarray:
        """Vertices within ``k`` edge hops of ``v``, excluding ``v``."""
        seen = {int(v)}
        frontier = [int(v)]
        for _ in range(k):
            nxt = []
            for u in frontier:
                for w in self.rings[u]:
                    w = int(w)
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
            frontier = nxt
        seen.discard(int(v))
        return np.array(sorted(seen), dtype=np.int64)

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        """Boolean mask of vertices on a boundary edge."""
        f = self.faces
        e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        e.sort(axis=1)
        uniq, counts = np.unique(e, axis=0, return_counts=True)
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[uniq[counts == 1].ravel()] = True
        return _frozen(mask)

    @cached_property
    def components(self) -> np.ndarray:
        """Connected-component label per vertex."""
        from scipy.sparse.csgraph import connected_components

        _, labels = connected_components(self.adjacency, directed=False)
        return _frozen(labels)

    @property
    def n_components(self) -> int:
        return int(self.components.max()) + 1

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.vertices).tobytes())
        h.update(np.ascontiguousarray(self.faces).tobytes())
        return h.hexdigest()

    # -- derived meshes ---------------------------------------------------

    def with_vertices(self, vertices: np.ndarray) -> TriMesh:
        return TriMesh(vertices, self.faces, name=self.name)

    def transformed(self, rotation: np.ndarray, translation=(0.0, 0.0, 0.0), scale: float = 1.0) -> TriMesh:
        """Similarity transform ``x -> scale * R x + t``."""
        r = np.asarray(rotation, dtype=np.float64)
        return self.with_vertices(scale * self.vertices @ r.T + np.asarray(translation, dtype=np.float64))

    def permuted(self, perm: np.ndarray) -> TriMesh:
        """Relabel vertices so that new vertex ``i`` is old vertex ``perm[i]``."""
        perm = np.asarray(perm)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(len(perm))
        return TriMesh(self.vertices[perm], inv[self.faces], name=self.name)

    def normalized(self) -> TriMesh:
        """Copy scaled to unit bounding-box diagonal (about the origin)."""
        return self.with_vertices(self.vertices / self.diam)


def submesh(mesh: TriMesh, keep: np.ndarray) -> tuple[TriMesh, np.ndarray]:
    """Restrict ``mesh`` to faces whose three vertices are all kept.

    Vertices left without any face are dropped as well. Returns the new mesh
    and, for each new vertex, its index in ``mesh``.
    """
    keep = np.asarray(keep, dtype=bool)
    faces = mesh.faces[keep[mesh.faces].all(axis=1)]
    if len(faces) == 0:
        raise MeshError("submesh would be empty")
    old = np.unique(faces.ravel())
    remap = np.full(mesh.n_vertices, -1, dtype=np.int64)
    remap[old] = np.arange(len(old))
    return TriMesh(mesh.vertices[old], remap[faces], name=mesh.name), old


@dataclass(frozen=True, eq=False)
class ScalarField:
    values: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).ravel()
        if not np.all(np.isfinite(v)):
            raise ValueError("scalar field has non-finite values")
        if self.kind not in FIELD_KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}")
        object.__setattr__(self, "values", _frozen(v))

    def __len__(self):
        return len(self.values)


# -- IO ---------------------------------------------------------------------


def _tokens(text: str):
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            yield line.split()


def read_off(path) -> TriMesh:
    text = Path(path).read_text()
    lines = list(_tokens(text))
    if not lines:
        raise MeshError(f"{path}: empty file")
    head = lines[0]
    if head[0] not in ("OFF", "COFF", "NOFF") and not head[0].endswith("OFF"):
        raise MeshError(f"{path}: missing OFF header")
    rest = head[1:]
    pos = 1
    if not rest:
        if len(lines) < 2:
            raise MeshError(f"{path}: truncated header")
        rest = lines[1]
        pos = 2
    try:
        nv, nf = int(rest[0]), int(rest[1])
    except (ValueError, IndexError) as err:
        raise MeshError(f"{path}: bad counts line") from err
    if nv == 0 or nf == 0:
        raise MeshError(f"{path}: empty mesh")
    if len(lines) < pos + nv + nf:
        raise MeshError(f"{path}: expected {nv} vertices and {nf} faces")
    try:
        verts = np.array([[float(x) for x in ln[:3]] for ln in lines[pos : pos + nv]])
        faces = []
        for ln in lines[pos + nv : pos + nv + nf]:
            k = int(ln[0])
            if k != 3:
                raise MeshError(f"{path}: non-triangular face with {k} vertices")
            faces.append([int(x) for x in ln[1:4]])
    except (ValueError, IndexError) as err:
        raise MeshError(f"{path}: parse failure: {err}") from err
    return TriMesh(verts, np.array(faces), name=Path(path).stem)


def read_ply(path) -> TriMesh:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != "ply":
        raise MeshError(f"{path}: missing ply magic")
    counts: dict[str, int] = {}
    vprops: list[str] = []
    current = None
    i = 1
    while i < len(lines):
        tok = lines[i].split()
        i += 1
        if not tok:
            continue
        if tok[0] == "format" and tok[1] != "ascii":
            raise MeshError(f"{path}: only ASCII PLY is supported")
        elif tok[0] == "element":
            current = tok[1]
            counts[current] = int(tok[2])
        elif tok[0] == "property" and current == "vertex":
            vprops.append(tok[-1])
        elif tok[0] == "end_header":
            break
    nv, nf = counts.get("vertex", 0), counts.get("face", 0)
    if nv == 0 or nf == 0:
        raise MeshError(f"{path}: empty mesh")
    body = [ln.split() for ln in lines[i:] if ln.strip()]
    if len(body) < nv + nf:
        raise MeshError(f"{path}: truncated body")
    try:
        xyz = [vprops.index(c) for c in ("x", "y", "z")]
        verts = np.array([[float(r[j]) for j in xyz] for r in body[:nv]])
        faces = []
        for r in body[nv : nv + nf]:
            if int(r[0]) != 3:
                raise MeshError(f"{path}: non-triangular face with {r[0]} vertices")
            faces.append([int(x) for x in r[1:4]])
    except (ValueError, IndexError) as err:
        raise MeshError(f"{path}: parse failure: {err}") from err
    return TriMesh(verts, np.array(faces), name=Path(path).stem)


def load_mesh(path) -> TriMesh:
    """Read an ASCII OFF or PLY triangle mesh."""
    suffix = Path(path).suffix.lower()
    if suffix == ".ply":
        return read_ply(path)
    if suffix == ".off":
        return read_off(path)
    raise MeshError(f"{path}: unsupported mesh format {suffix!r}")


def format_off(mesh: TriMesh) -> str:
    out = ["OFF", f"{mesh.n_vertices} {mesh.n_faces} 0"]
    out += [f"{x:.9g} {y:.9g} {z:.9g}" for x, y, z in mesh.vertices]
    out += [f"3 {a} {b} {c}" for a, b, c in mesh.faces]
    return "\n".join(out) + "\n"


def save_off(mesh: TriMesh, path) -> None:
    """Write OFF with 9 significant digits; a read/write cycle is byte-stable."""
    Path(path).write_text(format_off(mesh))


def save_ply(mesh: TriMesh, path) -> None:
    out = [
        "ply",
        "format ascii 1.0",
        f"element vertex {mesh.n_vertices}",
        "property double x",
        "property double y",
        "property double z",
        f"element face {mesh.n_faces}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    out += [f"{x:.9g} {y:.9g} {z:.9g}" for x, y, z in mesh.vertices]
    out += [f"3 {a} {b} {c}" for a, b, c in mesh.faces]
    Path(path).write_text("\n".join(out) + "\n")


def save_mesh(mesh: TriMesh, path) -> None:
    if Path(path).suffix.lower() == ".ply":
        save_ply(mesh, path)
    else:
        save_off(mesh, path)
