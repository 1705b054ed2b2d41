"""Evaluation settings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class EmptyEvaluableSet(ValueError):
    """No feature or region of the transformed shape has groundtruth."""


class NoMatches(ValueError):
    """No transformed feature has an accepted correspondence within the radius."""


class DegeneratePopulation(ValueError):
    """ROC positive or negative pair population is empty."""


@dataclass(frozen=True)
class EvalConfig:
    """``rho`` in shape units overrides ``rho_percent_diam`` (percent of the null diam)."""

    rho: float | None = None
    rho_percent_diam: float = 1.0
    overlap: float = 0.7
    tau: tuple[float, ...] | None = None  # ROC grid; default spans the distance range
    tau_points: int = 101
    normalize: bool = True  # scale meshes to unit diameter before detection
    dense_pairs: int = 2000
    dense_exact_limit: int = 1_000_000  # exact denominator below this many pairs
    seed: int = 0

    def __post_init__(self):
        if self.rho is not None and not self.rho > 0:
            raise ValueError("rho must be positive")
        if not self.rho_percent_diam > 0:
            raise ValueError("rho percentage must be positive")
        if not 0 < self.overlap <= 1:
            raise ValueError("overlap threshold must be in (0, 1]")
        if self.tau is not None and np.any(np.diff(self.tau) <= 0):
            raise ValueError("tau grid must be strictly ascending")
        if self.tau_points < 2:
            raise ValueError("tau grid needs at least 2 points")

    def radius(self, diam: float) -> float:
        return float(self.rho) if self.rho is not None else self.rho_percent_diam / 100.0 * diam
