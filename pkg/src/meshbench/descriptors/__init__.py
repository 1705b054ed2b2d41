"""Local descriptors at feature points and the dense HKS."""

from .base import DescriptorFormatError, DescriptorSet, export_csv, load_descriptors, save_descriptors
from .hks import hks_dense, hks_times
from .ldsift import LdSiftConfig, local_depth_sift
from .meshhog import MeshHogConfig, face_gradients, mesh_hog
from .spin import SpinConfig, spin_image

# name -> factory(params) -> callable(mesh, feats, basis)
DESCRIPTORS = {
    "spin-image": lambda p: lambda m, f, b: spin_image(m, f, config=SpinConfig(**p)),
    "ld-sift": lambda p: lambda m, f, b: local_depth_sift(m, f, config=LdSiftConfig(**p)),
    "mesh-hog": lambda p: lambda m, f, b: mesh_hog(m, f, config=MeshHogConfig(**p)),
    "hks": lambda p: lambda m, f, b: hks_dense(m, b, **p),
}


def is_dense(name: str) -> bool:
    return name == "hks"


__all__ = [
    "DESCRIPTORS",
    "DescriptorFormatError",
    "DescriptorSet",
    "LdSiftConfig",
    "MeshHogConfig",
    "SpinConfig",
    "export_csv",
    "face_gradients",
    "hks_dense",
    "hks_times",
    "is_dense",
    "load_descriptors",
    "local_depth_sift",
    "mesh_hog",
    "save_descriptors",
    "spin_image",
]
