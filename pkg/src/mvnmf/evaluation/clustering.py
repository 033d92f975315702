"""
External clustering validation: matched accuracy, NMI, Rand and Mirkin indices.
"""

from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import linear_sum_assignment
from scipy.stats import entropy
from sklearn.metrics import mutual_info_score, rand_score
from sklearn.metrics.cluster import contingency_matrix

from mvnmf.errors import InputError


class MetricsReport(BaseModel):
    """The four agreement scores between a ground truth and a predicted partition."""

    model_config = ConfigDict(frozen=True)

    accuracy: float = Field(ge=0.0, le=1.0)
    nmi: float = Field(ge=0.0, le=1.0)
    rand_index: float = Field(ge=0.0, le=1.0)
    mirkin_index: float = Field(ge=0.0, le=1.0)
    n: int = Field(ge=1)

    @model_validator(mode="after")
    def _mirkin_is_complement(self) -> "MetricsReport":
        if self.mirkin_index != 1.0 - self.rand_index:
            raise ValueError("mirkin_index must equal 1 - rand_index")
        return self

    def as_percentages(self) -> dict:
        """Scores in the Acc / NMI / RI / MI row layout, as percentages."""
        return {
            "Acc": 100.0 * self.accuracy,
            "NMI": 100.0 * self.nmi,
            "RI": 100.0 * self.rand_index,
            "MI": 100.0 * self.mirkin_index,
        }


def _as_labels(truth, pred, min_length: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    truth = np.asarray(truth).ravel()
    pred = np.asarray(pred).ravel()
    if truth.shape != pred.shape:
        raise InputError(f"Label vectors differ in length: {truth.size} vs {pred.size}")
    if truth.size < min_length:
        raise InputError(f"Need at least {min_length} labelled sample(s), got {truth.size}")
    return truth, pred


def matched_accuracy(truth, pred) -> float:
    """
    Fraction of samples correctly labelled under the best one-to-one cluster mapping.

    The contingency table is zero-padded to a square before the Hungarian assignment,
    so the cluster counts of the two partitions may differ.
    """
    truth, pred = _as_labels(truth, pred)
    table = contingency_matrix(truth, pred)
    size = max(table.shape)
    padded = np.zeros((size, size), dtype=table.dtype)
    padded[: table.shape[0], : table.shape[1]] = table
    rows, cols = linear_sum_assignment(padded, maximize=True)
    return float(padded[rows, cols].sum()) / truth.size


def nmi(truth, pred) -> float:
    """
    Normalized mutual information I(U;V) / sqrt(H(U) H(V)) with natural logarithms.

    Two single-cluster partitions score 1.0; a single-cluster partition against any
    other partition scores 0.0.
    """
    truth, pred = _as_labels(truth, pred)
    h_truth = float(entropy(np.unique(truth, return_counts=True)[1]))
    h_pred = float(entropy(np.unique(pred, return_counts=True)[1]))
    if h_truth == 0.0 and h_pred == 0.0:
        return 1.0
    if h_truth == 0.0 or h_pred == 0.0:
        return 0.0
    score = mutual_info_score(truth, pred) / np.sqrt(h_truth * h_pred)
    return float(np.clip(score, 0.0, 1.0))


def rand_and_mirkin(truth, pred) -> Tuple[float, float]:
    """Pair-counting Rand index and the Mirkin index 1 - RI."""
    truth, pred = _as_labels(truth, pred, min_length=2)
    ri = float(rand_score(truth, pred))
    return ri, 1.0 - ri


def evaluate(truth, pred) -> MetricsReport:
    """All four metrics for one prediction."""
    truth, pred = _as_labels(truth, pred, min_length=2)
    ri, mirkin = rand_and_mirkin(truth, pred)
    return MetricsReport(
        accuracy=matched_accuracy(truth, pred),
        nmi=nmi(truth, pred),
        rand_index=ri,
        mirkin_index=mirkin,
        n=truth.size,
    )
