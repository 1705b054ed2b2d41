"""Repeatability, descriptor quality, ROC and table aggregation."""

from .config import DegeneratePopulation, EmptyEvaluableSet, EvalConfig, NoMatches
from .points import feature_distance_matrix, match_distances, point_repeatability, repeatability_vs_rho
from .quality import QualityResult, RocCurve, dense_quality, descriptor_quality, roc, roc_from_distances
from .regions import overlap, region_repeatability, repeatability_vs_overlap
from .report import COLUMNS, MISSING, RepeatabilityReport, aggregate

__all__ = [
    "COLUMNS",
    "DegeneratePopulation",
    "EmptyEvaluableSet",
    "EvalConfig",
    "MISSING",
    "NoMatches",
    "QualityResult",
    "RepeatabilityReport",
    "RocCurve",
    "aggregate",
    "dense_quality",
    "descriptor_quality",
    "feature_distance_matrix",
    "match_distances",
    "overlap",
    "point_repeatability",
    "region_repeatability",
    "repeatability_vs_overlap",
    "repeatability_vs_rho",
    "roc",
    "roc_from_distances",
]
