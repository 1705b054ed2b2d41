"""Groundtruth maps from transformed-shape vertices to null-shape points."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..mesh import TriMesh


class CorrespondenceError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CorrespondenceMap:
    """One entry per transformed vertex.

    Entry ``j`` is either a null vertex (``vertex[j] >= 0``), a point on null
    face ``face[j]`` with barycentric weights ``bary[j]``, or no groundtruth
    (both -1).
    """

    vertex: np.ndarray
    face: np.ndarray
    bary: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertex, dtype=np.int64)
        f = np.asarray(self.face, dtype=np.int64)
        b = np.asarray(self.bary, dtype=np.float64).reshape(-1, 3)
        if not (len(v) == len(f) == len(b)):
            raise CorrespondenceError("vertex, face and bary lengths differ")
        if np.any((v >= 0) & (f >= 0)):
            raise CorrespondenceError("entry is both a vertex and a face reference")
        fb = f >= 0
        if np.any(np.abs(b[fb].sum(axis=1) - 1.0) > 1e-9) or np.any(b[fb] < -1e-9):
            raise CorrespondenceError("barycentric weights must be >= 0 and sum to 1")
        for a in (v, f, b):
            a.flags.writeable = False
        object.__setattr__(self, "vertex", v)
        object.__setattr__(self, "face", f)
        object.__setattr__(self, "bary", b)

    def __len__(self):
        return len(self.vertex)

    @classmethod
    def identity(cls, n: int) -> CorrespondenceMap:
        return cls.from_vertices(np.arange(n))

    @classmethod
    def from_vertices(cls, idx) -> CorrespondenceMap:
        idx = np.asarray(idx, dtype=np.int64)
        return cls(idx, np.full(len(idx), -1), np.zeros((len(idx), 3)))

    @property
    def valid(self) -> np.ndarray:
        return (self.vertex >= 0) | (self.face >= 0)

    def nearest_vertex(self, null: TriMesh) -> np.ndarray:
        """Null vertex per entry; barycentric refs resolve to the max-weight corner."""
        out = self.vertex.copy()
        fb = self.face >= 0
        if fb.any():
            corner = np.argmax(self.bary[fb], axis=1)
            out[fb] = null.faces[self.face[fb], corner]
        return out

    def points(self, null: TriMesh) -> np.ndarray:
        """Null-shape positions (nan rows where there is no groundtruth)."""
        p = np.full((len(self), 3), np.nan)
        vb = self.vertex >= 0
        p[vb] = null.vertices[self.vertex[vb]]
        fb = self.face >= 0
        if fb.any():
            tri = null.vertices[null.faces[self.face[fb]]]
            p[fb] = np.einsum("ij,ijk->ik", self.bary[fb], tri)
        return p

    def restricted(self, rows) -> CorrespondenceMap:
        """Entries for a subset of transformed vertices (e.g. after removing some)."""
        rows = np.asarray(rows)
        return CorrespondenceMap(self.vertex[rows], self.face[rows], self.bary[rows])

    def composed(self, inner: CorrespondenceMap) -> CorrespondenceMap:
        """Map through ``self`` first, then ``inner`` (vertex refs only on ``self``)."""
        v = np.full(len(self), -1)
        f = np.full(len(self), -1)
        b = np.zeros((len(self), 3))
        ok = self.vertex >= 0
        v[ok] = inner.vertex[self.vertex[ok]]
        f[ok] = inner.face[self.vertex[ok]]
        b[ok] = inner.bary[self.vertex[ok]]
        return CorrespondenceMap(v, f, b)


def format_correspondence(corr: CorrespondenceMap) -> str:
    lines = []
    for j in range(len(corr)):
        if corr.vertex[j] >= 0:
            lines.append(f"{j} {corr.vertex[j]}")
        elif corr.face[j] >= 0:
            b0, b1, b2 = corr.bary[j]
            lines.append(f"{j} {corr.face[j]} {b0:.17g} {b1:.17g} {b2:.17g}")
        else:
            lines.append(f"{j} -1")
    return "\n".join(lines) + "\n"


def save_correspondence(corr: CorrespondenceMap, path) -> None:
    Path(path).write_text(format_correspondence(corr))


def parse_correspondence(text: str, n_null_vertices: int, n_null_faces: int, n_transformed: int) -> CorrespondenceMap:
    vertex = np.full(n_transformed, -1, dtype=np.int64)
    face = np.full(n_transformed, -1, dtype=np.int64)
    bary = np.zeros((n_transformed, 3))
    seen = np.zeros(n_transformed, dtype=bool)
    for lineno, line in enumerate(text.splitlines(), 1):
        tok = line.split()
        if not tok or tok[0].startswith("#"):
            continue
        try:
            j = int(tok[0])
            if len(tok) == 2:
                ref = int(tok[1])
                if ref >= n_null_vertices or ref < -1:
                    raise CorrespondenceError(f"line {lineno}: null vertex {ref} out of range")
                if not 0 <= j < n_transformed:
                    raise CorrespondenceError(f"line {lineno}: transformed vertex {j} out of range")
                vertex[j] = ref
            elif len(tok) == 5:
                fi = int(tok[1])
                w = [float(x) for x in tok[2:]]
                if not 0 <= fi < n_null_faces:
                    raise CorrespondenceError(f"line {lineno}: null face {fi} out of range")
                if not 0 <= j < n_transformed:
                    raise CorrespondenceError(f"line {lineno}: transformed vertex {j} out of range")
                face[j] = fi
                bary[j] = w
            else:
                raise CorrespondenceError(f"line {lineno}: malformed line {line!r}")
        except ValueError as err:
            if isinstance(err, CorrespondenceError):
                raise
            raise CorrespondenceError(f"line {lineno}: malformed line {line!r}") from err
        if seen[j]:
            raise CorrespondenceError(f"line {lineno}: transformed vertex {j} listed twice")
        seen[j] = True
    if not seen.all():
        raise CorrespondenceError(
            f"correspondence covers {int(seen.sum())} of {n_transformed} transformed vertices"
        )
    return CorrespondenceMap(vertex, face, bary)


def load_correspondence(path, null: TriMesh, transformed: TriMesh) -> CorrespondenceMap:
    """Read and validate a correspondence file against both meshes."""
    return parse_correspondence(Path(path).read_text(), null.n_vertices, null.n_faces, transformed.n_vertices)
