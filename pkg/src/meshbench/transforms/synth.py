"""Seeded synthesis of the transformation classes at strengths 1-5."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..geodesic import geodesic_distances
from ..mesh import TriMesh, submesh
from .correspondence import CorrespondenceMap
from .decimate import decimate

logger = logging.getLogger(__name__)

SYNTHETIC_CLASSES = ("noise", "shot-noise", "holes", "micro-holes", "sampling", "scaling", "affine", "partial")
EXTERNAL_CLASSES = ("isometry", "rasterization", "view", "topology")
CLASSES = SYNTHETIC_CLASSES + ("external",)


@dataclass(frozen=True)
class TransformSpec:
    cls: str
    strength: int
    seed: int = 0

    def __post_init__(self):
        if self.cls not in CLASSES:
            raise ValueError(f"unknown transformation class {self.cls!r}")
        if self.strength not in (1, 2, 3, 4, 5):
            raise ValueError(f"strength must be in 1..5, got {self.strength}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class TransformConfig:
    """Magnitude calibrations; only proportionality to strength is fixed."""

    noise_sigma: float = 0.002  # x strength x diam
    noise_clip: float = 3.5  # displacement norm clipped at this many sigma
    shot_fraction: float = 0.002  # x strength
    shot_magnitude: float = 0.02  # x diam
    hole_radius: float = 0.025  # x diam
    micro_holes: int = 20  # x strength
    sampling_fractions: tuple = (0.80, 0.60, 0.40, 0.25, 0.18)
    scale_factors: tuple = (0.25, 0.5, 2.0, 4.0, 8.0)
    affine_step: float = 0.05  # x strength
    affine_min_det: float = 0.2
    partial_fractions: tuple = (0.90, 0.75, 0.60, 0.45, 0.30)


@dataclass
class Transformed:
    mesh: TriMesh
    corr: CorrespondenceMap
    meta: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.mesh, self.corr))


def _survivors(mesh: TriMesh, keep: np.ndarray, cls: str) -> Transformed:
    out, old = submesh(mesh, keep)
    meta = {"removed_vertices": int(mesh.n_vertices - out.n_vertices)}
    if out.n_components > mesh.n_components:
        logger.warning("%s: output has %d components", cls, out.n_components)
        meta["disconnected"] = True
        meta["components"] = out.n_components
    return Transformed(out, CorrespondenceMap.from_vertices(old), meta)


def _noise(mesh, s, rng, cfg):
    sigma = cfg.noise_sigma * s * mesh.diam
    d = rng.normal(scale=sigma, size=mesh.vertices.shape)
    norm = np.linalg.norm(d, axis=1, keepdims=True)
    limit = cfg.noise_clip * sigma
    d = np.where(norm > limit, d * (limit / np.maximum(norm, 1e-300)), d)
    return Transformed(mesh.with_vertices(mesh.vertices + d), CorrespondenceMap.identity(mesh.n_vertices), {"sigma": sigma})


def _shot_noise(mesh, s, rng, cfg):
    n = mesh.n_vertices
    count = max(1, int(round(cfg.shot_fraction * s * n)))
    idx = np.sort(rng.choice(n, size=count, replace=False))
    v = mesh.vertices.copy()
    v[idx] += cfg.shot_magnitude * mesh.diam * mesh.normals[idx]
    return Transformed(mesh.with_vertices(v), CorrespondenceMap.identity(n), {"shot_vertices": idx.tolist()})


def _holes(mesh, s, rng, cfg):
    seeds = rng.choice(mesh.n_vertices, size=s, replace=False)
    radius = cfg.hole_radius * mesh.diam
    keep = np.ones(mesh.n_vertices, dtype=bool)
    for c in seeds:
        d = geodesic_distances(mesh, [c], cap=radius).distances
        keep &= ~(d <= radius)
    out = _survivors(mesh, keep, "holes")
    out.meta["hole_centers"] = sorted(int(c) for c in seeds)
    return out


def _micro_holes(mesh, s, rng, cfg):
    want = cfg.micro_holes * s
    blocked = np.zeros(mesh.n_vertices, dtype=bool)
    blocked[mesh.boundary_vertices] = True
    chosen = []
    for v in rng.permutation(mesh.n_vertices):
        if blocked[v]:
            continue
        chosen.append(int(v))
        blocked[v] = True
        blocked[mesh.k_ring(int(v), 2)] = True
        if len(chosen) == want:
            break
    if len(chosen) < want:
        logger.warning("micro-holes: only %d of %d isolated stars fit", len(chosen), want)
    keep = np.ones(mesh.n_vertices, dtype=bool)
    keep[chosen] = False
    out = _survivors(mesh, keep, "micro-holes")
    out.meta["removed"] = sorted(chosen)
    return out


def _sampling(mesh, s, rng, cfg):
    frac = cfg.sampling_fractions[s - 1]
    out, old = decimate(mesh, frac)
    return Transformed(out, CorrespondenceMap.from_vertices(old), {"fraction": out.n_vertices / mesh.n_vertices})


def _scaling(mesh, s, rng, cfg):
    beta = cfg.scale_factors[s - 1]
    return Transformed(mesh.with_vertices(beta * mesh.vertices), CorrespondenceMap.identity(mesh.n_vertices), {"factor": beta})


def _affine(mesh, s, rng, cfg):
    for _ in range(1000):
        R = rng.uniform(-1.0, 1.0, size=(3, 3))
        A = np.eye(3) + cfg.affine_step * s * R
        if np.linalg.det(A) > cfg.affine_min_det:
            break
    else:
        raise RuntimeError("affine: no matrix with sufficient determinant")
    return Transformed(mesh.with_vertices(mesh.vertices @ A.T), CorrespondenceMap.identity(mesh.n_vertices), {"matrix": A.tolist()})


def _partial(mesh, s, rng, cfg):
    frac = cfg.partial_fractions[s - 1]
    n = rng.normal(size=3)
    n /= np.linalg.norm(n)
    side = (mesh.vertices - mesh.vertices.mean(axis=0)) @ n
    cut = np.quantile(side, frac)
    out = _survivors(mesh, side <= cut, "partial")
    out.meta.update(normal=n.tolist(), offset=float(cut))
    return out


_SYNTH = {
    "noise": _noise,
    "shot-noise": _shot_noise,
    "holes": _holes,
    "micro-holes": _micro_holes,
    "sampling": _sampling,
    "scaling": _scaling,
    "affine": _affine,
    "partial": _partial,
}


def apply_transform(mesh: TriMesh, spec: TransformSpec, config: TransformConfig | None = None) -> Transformed:
    """Synthesize one transformed version of ``mesh`` with its groundtruth map.

    Deterministic given ``spec.seed``. The result unpacks as ``(mesh, corr)``;
    ``.meta`` carries per-class details such as the disconnected flag.
    """
    if spec.cls == "external":
        raise ValueError("external transformations are ingested, not synthesized")
    cfg = config or TransformConfig()
    rng = np.random.default_rng(int(spec.seed))
    out = _SYNTH[spec.cls](mesh, spec.strength, rng, cfg)
    out.mesh = TriMesh(out.mesh.vertices, out.mesh.faces, name=f"{mesh.name}.{spec.cls}.{spec.strength}")
    out.meta.update(cls=spec.cls, strength=spec.strength, seed=int(spec.seed))
    return out
