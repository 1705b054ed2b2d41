"""Descriptor matrices bound to feature points (or to every vertex), plus file IO."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAGIC = b"MBDESC01"
_HEADER = struct.Struct("<8sQQ16s")


class DescriptorFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DescriptorSet:
    """Rows are descriptors; ``vertices[i]`` is the vertex row ``i`` describes.

    ``dense`` sets have one row per vertex in vertex order. ``degenerate``
    flags rows left at zero (empty support, no gradient).
    """

    matrix: np.ndarray
    vertices: np.ndarray
    kind: str
    dense: bool = False
    degenerate: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2:
            raise ValueError("descriptor matrix must be 2-D")
        v = np.asarray(self.vertices, dtype=np.int64).ravel()
        if len(v) != len(m):
            raise ValueError("row count does not match binding")
        if not np.all(np.isfinite(m)):
            raise ValueError("descriptor entries must be finite")
        deg = np.zeros(len(m), dtype=bool) if self.degenerate is None else np.asarray(self.degenerate, dtype=bool)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "degenerate", deg)

    def __len__(self):
        return len(self.matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


def save_descriptors(desc: DescriptorSet, path) -> None:
    """Binary layout: header (magic, rows, cols, kind), row-major float64
    matrix, then the int64 vertex binding of each row."""
    kind = desc.kind.encode("ascii")[:16]
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, len(desc), desc.dim, kind))
        fh.write(np.ascontiguousarray(desc.matrix, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(desc.vertices, dtype="<i8").tobytes())


def load_descriptors(path) -> DescriptorSet:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise DescriptorFormatError(f"{path}: truncated header")
    magic, rows, cols, kind = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise DescriptorFormatError(f"{path}: bad magic {magic!r}")
    body = raw[_HEADER.size :]
    need = rows * cols * 8 + rows * 8
    if len(body) != need:
        raise DescriptorFormatError(f"{path}: expected {need} payload bytes, found {len(body)}")
    m = np.frombuffer(body[: rows * cols * 8], dtype="<f8").reshape(rows, cols)
    v = np.frombuffer(body[rows * cols * 8 :], dtype="<i8")
    kind_s = kind.rstrip(b"\0").decode("ascii")
    dense = bool(rows > 0 and np.array_equal(v, np.arange(rows)) and kind_s == "hks")
    return DescriptorSet(m.copy(), v.copy(), kind_s, dense=dense)


def export_csv(desc: DescriptorSet, path) -> None:
    """CSV with the bound vertex in the first column."""
    header = "vertex," + ",".join(f"d{i}" for i in range(desc.dim))
    lines = [header] + [f"{v}," + ",".join(f"{x:.17g}" for x in row) for v, row in zip(desc.vertices, desc.matrix)]
    Path(path).write_text("\n".join(lines) + "\n")
