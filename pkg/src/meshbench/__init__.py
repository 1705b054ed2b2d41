"""Benchmark toolkit for feature detection and description on triangle meshes
under synthetic and ingested shape transformations."""

from .mesh import MeshError, ScalarField, TriMesh, load_mesh, save_mesh
from .spectral import SpectralBasis, SpectralCache, eigendecompose

__version__ = "0.1.0"

__all__ = [
    "MeshError",
    "ScalarField",
    "SpectralBasis",
    "SpectralCache",
    "TriMesh",
    "eigendecompose",
    "load_mesh",
    "save_mesh",
]
