"""Point and region feature detectors."""

from .dog import DoGConfig, ScaleDoGConfig, gaussian_kernel, mesh_dog, mesh_scale_dog
from .features import (
    FeaturePoints,
    FeatureRegions,
    load_features,
    load_regions,
    save_features,
    save_regions,
)
from .harris import HarrisConfig, harris3d
from .mser import MserConfig, mser_from_weights, shape_mser

# name -> (kind, factory(params) -> callable(mesh, basis)); kind is "points" or "regions"
DETECTORS = {
    "harris3d-ring1": ("points", lambda p: lambda m, b: harris3d(m, config=HarrisConfig(mode="ring-1", **p))),
    "harris3d-ring2": ("points", lambda p: lambda m, b: harris3d(m, config=HarrisConfig(mode="ring-2", **p))),
    "harris3d-adaptive": ("points", lambda p: lambda m, b: harris3d(m, config=HarrisConfig(mode="adaptive", **p))),
    "meshdog-mean": ("points", lambda p: lambda m, b: mesh_dog(m, config=DoGConfig(field="mean", **p))),
    "meshdog-gaussian": ("points", lambda p: lambda m, b: mesh_dog(m, config=DoGConfig(field="gaussian", **p))),
    "mesh-scale-dog": ("points", lambda p: lambda m, b: mesh_scale_dog(m, config=ScaleDoGConfig(**p))),
    "mser-vw-hks": ("regions", lambda p: lambda m, b: shape_mser(m, b, config=MserConfig(weighting="vw-hks", **p))),
    "mser-ew-inv-hks": ("regions", lambda p: lambda m, b: shape_mser(m, b, config=MserConfig(weighting="ew-inv-hks", **p))),
    "mser-ew-inv-ct": ("regions", lambda p: lambda m, b: shape_mser(m, b, config=MserConfig(weighting="ew-inv-ct", **p))),
}


def needs_basis(name: str) -> bool:
    return name.startswith("mser-")


__all__ = [
    "DETECTORS",
    "DoGConfig",
    "FeaturePoints",
    "FeatureRegions",
    "HarrisConfig",
    "MserConfig",
    "ScaleDoGConfig",
    "gaussian_kernel",
    "harris3d",
    "load_features",
    "load_regions",
    "mesh_dog",
    "mesh_scale_dog",
    "mser_from_weights",
    "needs_basis",
    "save_features",
    "save_regions",
    "shape_mser",
]
