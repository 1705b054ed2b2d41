"""Dense heat kernel signature."""

from __future__ import annotations

import numpy as np

from ..mesh import TriMesh
from ..spectral import SpectralBasis, heat_kernel_diagonal
from .base import DescriptorSet

LOG_RANGE = 4 * np.log(10)


def hks_times(basis: SpectralBasis, count: int) -> np.ndarray:
    """``count`` log-spaced times in ``[4 ln10 / lambda_max, 4 ln10 / lambda_min+]``.

    The lower end of the range uses the smallest positive eigenvalue, so
    disconnected meshes (several zero eigenvalues) are handled.
    """
    if count < 2:
        raise ValueError("need at least 2 HKS times")
    lo = LOG_RANGE / float(basis.eigenvalues.max())
    hi = LOG_RANGE / basis.first_positive
    return np.geomspace(lo, hi, count)


def hks_dense(mesh: TriMesh, basis: SpectralBasis, times=16, normalize: bool = False) -> DescriptorSet:
    """``k_t(x, x)`` at every vertex; ``times`` is a count or explicit times.

    With ``normalize`` each column is divided by ``sum_x area(x) k_t(x, x)``.
    """
    if basis.eigenvectors.shape[0] != mesh.n_vertices:
        raise ValueError("basis does not match mesh")
    t = hks_times(basis, int(times)) if np.ndim(times) == 0 else np.asarray(times, dtype=np.float64)
    if np.any(t <= 0):
        raise ValueError("HKS times must be positive")
    k = heat_kernel_diagonal(basis, t)
    if normalize:
        k = k / (mesh.vertex_areas @ k)
    return DescriptorSet(k, np.arange(mesh.n_vertices), "hks", dense=True, diagnostics={"times": t.tolist()})
