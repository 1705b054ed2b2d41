"""Laplace-Beltrami eigenbasis, heat and commute-time kernels, basis cache."""

from __future__ import annotations

import logging
import os
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .geometry import cotangent_laplacian
from .mesh import TriMesh

logger = logging.getLogger(__name__)

DENSE_LIMIT = 2500


class SpectralError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """``k`` smallest generalized eigenpairs of (W, M), area-orthonormal.

    ``eigenvectors[:, i]`` is the i-th eigenfunction sampled at the vertices.
    ``n_components`` > 1 flags a disconnected mesh, in which case each
    eigenfunction is supported on a single component.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    mass: np.ndarray
    n_components: int = 1

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    def truncated(self, k: int) -> SpectralBasis:
        return SpectralBasis(self.eigenvalues[:k], self.eigenvectors[:, :k], self.mass, self.n_components)

    @property
    def first_positive(self) -> float:
        """Smallest eigenvalue that is not a numerical zero."""
        lam = self.eigenvalues
        pos = lam[lam > 1e-8 * max(lam.max(), 1e-300)]
        if len(pos) == 0:
            raise SpectralError("basis has no positive eigenvalue")
        return float(pos[0])


def _solve(W: sparse.csr_matrix, mass: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    n = W.shape[0]
    if n <= DENSE_LIMIT or k >= n - 1:
        lam, phi = scipy.linalg.eigh(W.toarray(), np.diag(mass), subset_by_index=[0, min(k, n) - 1])
        return lam, phi
    M = sparse.diags(mass).tocsc()
    sigma = -1e-8 * float(W.diagonal().mean() / mass.mean())
    try:
        lam, phi = eigsh(W.tocsc(), k=k, M=M, sigma=sigma, which="LM", tol=0.0, maxiter=20 * n)
    except ArpackNoConvergence as err:
        raise SpectralError(
            f"eigsh did not converge: {len(err.eigenvalues)} of {k} eigenpairs after {20 * n} iterations"
        ) from err
    order = np.argsort(lam)
    return lam[order], phi[:, order]


def _orthonormalize(lam: np.ndarray, phi: np.ndarray, mass: np.ndarray) -> np.ndarray:
    # re-orthonormalize within clusters of (near-)equal eigenvalues
    phi = phi.copy()
    i = 0
    scale = max(abs(lam).max(), 1e-300)
    while i < len(lam):
        j = i + 1
        while j < len(lam) and abs(lam[j] - lam[i]) <= 1e-6 * scale:
            j += 1
        block = phi[:, i:j]
        gram = block.T @ (mass[:, None] * block)
        L = np.linalg.cholesky(gram)
        phi[:, i:j] = scipy.linalg.solve_triangular(L, block.T, lower=True).T
        i = j
    return phi


def eigendecompose(mesh: TriMesh, k: int) -> SpectralBasis:
    """Smallest ``k`` eigenpairs of the cotangent Laplace-Beltrami operator.

    Disconnected meshes are decomposed per component and the pairs merged
    by eigenvalue; the result is flagged via ``n_components``.
    """
    n = mesh.n_vertices
    if not 1 <= k < n:
        raise ValueError(f"k must be in [1, {n - 1}], got {k}")
    W, mass = cotangent_laplacian(mesh)
    labels = mesh.components
    ncomp = int(labels.max()) + 1
    if ncomp == 1:
        lam, phi = _solve(W, mass, k)
    else:
        logger.warning("eigendecompose: mesh has %d components, decomposing each", ncomp)
        lams, phis = [], []
        for c in range(ncomp):
            idx = np.flatnonzero(labels == c)
            kc = min(k, len(idx))
            sub = W[idx][:, idx]
            lc, pc = _solve(sub.tocsr(), mass[idx], kc) if len(idx) > 1 else (np.zeros(1), np.ones((1, 1)) / np.sqrt(mass[idx]))
            full = np.zeros((n, kc))
            full[idx] = pc
            lams.append(lc)
            phis.append(full)
        lam = np.concatenate(lams)
        phi = np.concatenate(phis, axis=1)
        order = np.argsort(lam, kind="stable")[:k]
        lam, phi = lam[order], phi[:, order]
    lam = np.maximum(lam, 0.0)
    phi = _orthonormalize(lam, phi, mass)
    # fix the sign so that each eigenfunction has positive area-weighted third moment
    # sum; purely for reproducible output
    s = np.sign(np.sum(mass[:, None] * phi**3, axis=0))
    s[s == 0] = 1.0
    phi = phi * s
    return SpectralBasis(lam, phi, mass, ncomp)


# -- kernels ------------------------------------------------------------------


def heat_kernel_diagonal(basis: SpectralBasis, times) -> np.ndarray:
    """``k_t(x, x) = sum_i exp(-lambda_i t) phi_i(x)^2``, shape (n, len(times))."""
    t = np.atleast_1d(np.asarray(times, dtype=np.float64))
    coef = np.exp(-np.outer(basis.eigenvalues, t))
    return (basis.eigenvectors**2) @ coef


def heat_kernel_pairs(basis: SpectralBasis, u: np.ndarray, v: np.ndarray, t: float) -> np.ndarray:
    coef = np.exp(-basis.eigenvalues * t)
    return np.einsum("ek,ek,k->e", basis.eigenvectors[u], basis.eigenvectors[v], coef)


def commute_time_pairs(basis: SpectralBasis, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Commute-time kernel ``sum_{i>=1} phi_i(u) phi_i(v) / lambda_i``."""
    lam = basis.eigenvalues
    pos = lam > 1e-8 * max(lam.max(), 1e-300)
    phi = basis.eigenvectors[:, pos]
    return np.einsum("ek,ek,k->e", phi[u], phi[v], 1.0 / lam[pos])


# -- cache --------------------------------------------------------------------


class SpectralCache:
    """On-disk cache of eigenbases keyed by mesh content hash and ``k``.

    Reads are lock-free; writes go through a temp file and an atomic rename
    under a process-local lock.
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0
        self._lock = threading.Lock()

    def _path(self, mesh: TriMesh, k: int) -> Path:
        return self.directory / f"{mesh.content_hash()[:32]}-k{k}.npz"

    def get(self, mesh: TriMesh, k: int) -> SpectralBasis:
        path = self._path(mesh, k)
        if path.exists():
            with np.load(path) as z:
                basis = SpectralBasis(z["eigenvalues"], z["eigenvectors"], z["mass"], int(z["n_components"]))
            self.hits += 1
            return basis
        basis = eigendecompose(mesh, k)
        self.misses += 1
        with self._lock:
            tmp = path.with_suffix(f".{os.getpid()}.tmp.npz")
            np.savez(
                tmp,
                eigenvalues=basis.eigenvalues,
                eigenvectors=basis.eigenvectors,
                mass=basis.mass,
                n_components=basis.n_components,
            )
            os.replace(tmp, path)
        return basis
