"""Clustering metrics and factor interpretation."""

from mvnmf.evaluation.clustering import (
    MetricsReport,
    evaluate,
    matched_accuracy,
    nmi,
    rand_and_mirkin,
)
from mvnmf.evaluation.importance import feature_importance, rank_features

__all__ = [
    "MetricsReport",
    "evaluate",
    "matched_accuracy",
    "nmi",
    "rand_and_mirkin",
    "feature_importance",
    "rank_features",
]
