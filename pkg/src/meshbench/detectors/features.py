"""Detector outputs and their text file formats."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True, eq=False)
class FeaturePoints:
    """Detected vertices sorted by descending response.

    ``scales`` is all-nan for detectors without a scale estimate.
    ``diagnostics`` collects counts such as skipped vertices.
    """

    vertices: np.ndarray
    responses: np.ndarray
    scales: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.int64).ravel()
        r = np.asarray(self.responses, dtype=np.float64).ravel()
        s = np.full(len(v), np.nan) if self.scales is None else np.asarray(self.scales, dtype=np.float64).ravel()
        if not (len(v) == len(r) == len(s)):
            raise ValueError("vertices, responses and scales must have equal length")
        if len(np.unique(v)) != len(v):
            raise ValueError("feature vertices must be distinct")
        if not np.all(np.isfinite(r)):
            raise ValueError("responses must be finite")
        if np.any(np.diff(r) > 0):
            raise ValueError("features must be sorted by descending response")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "responses", r)
        object.__setattr__(self, "scales", s)

    def __len__(self):
        return len(self.vertices)

    @property
    def has_scale(self) -> bool:
        return len(self) > 0 and bool(np.all(np.isfinite(self.scales)))

    @classmethod
    def select(cls, vertices, responses, scales=None, target: int | None = None, diagnostics=None) -> FeaturePoints:
        """Sort by (response desc, vertex asc) and keep the first ``target``."""
        vertices = np.asarray(vertices, dtype=np.int64)
        responses = np.asarray(responses, dtype=np.float64)
        order = np.lexsort((vertices, -responses))
        if target is not None:
            order = order[:target]
        sc = None if scales is None else np.asarray(scales, dtype=np.float64)[order]
        return cls(vertices[order], responses[order], sc, dict(diagnostics or {}))

    def relabeled(self, new_index: np.ndarray) -> FeaturePoints:
        """Map vertex ids through ``new_index`` (old id -> new id)."""
        return FeaturePoints(new_index[self.vertices], self.responses, self.scales, self.diagnostics)

    def scaled(self, factor: float) -> FeaturePoints:
        return FeaturePoints(self.vertices, self.responses, self.scales * factor, self.diagnostics)

    def subset(self, rows) -> FeaturePoints:
        rows = np.asarray(rows, dtype=np.int64)
        return FeaturePoints(self.vertices[rows], self.responses[rows], self.scales[rows], self.diagnostics)


@dataclass(frozen=True, eq=False)
class FeatureRegions:
    """Vertex-set regions with a stability score each; regions may overlap."""

    regions: tuple
    stability: np.ndarray
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        regs = tuple(np.unique(np.asarray(r, dtype=np.int64)) for r in self.regions)
        st = np.asarray(self.stability, dtype=np.float64).ravel()
        if len(regs) != len(st):
            raise ValueError("one stability score per region")
        if any(len(r) == 0 for r in regs):
            raise ValueError("regions must be non-empty")
        keys = {r.tobytes() for r in regs}
        if len(keys) != len(regs):
            raise ValueError("duplicate regions")
        object.__setattr__(self, "regions", regs)
        object.__setattr__(self, "stability", st)

    def __len__(self):
        return len(self.regions)


# -- IO -----------------------------------------------------------------------


def format_features(feats: FeaturePoints) -> str:
    return "".join(f"{v} {r:.17g} {s:.17g}\n" for v, r, s in zip(feats.vertices, feats.responses, feats.scales))


def save_features(feats: FeaturePoints, path) -> None:
    Path(path).write_text(format_features(feats))


def load_features(path) -> FeaturePoints:
    rows = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not rows:
        return FeaturePoints(np.zeros(0, np.int64), np.zeros(0))
    v = np.array([int(r[0]) for r in rows])
    resp = np.array([float(r[1]) for r in rows])
    sc = np.array([float(r[2]) if len(r) > 2 else np.nan for r in rows])
    return FeaturePoints(v, resp, sc)


def format_regions(regions: FeatureRegions) -> str:
    return "".join(
        f"{s:.17g} " + " ".join(map(str, r)) + "\n" for r, s in zip(regions.regions, regions.stability)
    )


def save_regions(regions: FeatureRegions, path) -> None:
    Path(path).write_text(format_regions(regions))


def load_regions(path) -> FeatureRegions:
    rows = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    return FeatureRegions(tuple(np.array([int(x) for x in r[1:]]) for r in rows), np.array([float(r[0]) for r in rows]))
