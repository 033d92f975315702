"""
Feature importance from the explicit centroid factor of a linear-kernel view.
"""

import numpy as np
import pandas as pd

from mvnmf.data.dataset import MultiViewDataset
from mvnmf.errors import InputError, UnsupportedOperationError
from mvnmf.solver.kernel_mvnmf import FactorizationState

IMPORTANCE_COLUMNS = ["rank", "feature", "importance"]


def rank_features(F: np.ndarray) -> pd.DataFrame:
    """
    Rank the rows of an m x k centroid matrix by their L1 norm.

    Returns:
        DataFrame with columns rank (1-based), feature (0-based row index) and importance,
        sorted by importance descending with ties broken by ascending feature index
    """
    importance = np.abs(np.asarray(F, dtype=float)).sum(axis=1)
    # stable sort on the negated scores keeps ties in index order
    order = np.argsort(-importance, kind="stable")
    return pd.DataFrame(
        {
            "rank": np.arange(1, order.size + 1),
            "feature": order,
            "importance": importance[order],
        },
        columns=IMPORTANCE_COLUMNS,
    )


def feature_importance(
    dataset: MultiViewDataset, state: FactorizationState, view_index: int
) -> pd.DataFrame:
    """
    Ranked feature importances of one view: F = X P, importance_j = sum_c |F_jc|.

    Args:
        dataset: The dataset the state was fitted on
        state: Fitted kernel multi-view factorization
        view_index: View to explain

    Returns:
        Ranking table (see :func:`rank_features`)
    """
    if not 0 <= view_index < dataset.v:
        raise InputError(f"view_index {view_index} out of range for {dataset.v} views")
    if len(state.P) != dataset.v:
        raise InputError(f"State has {len(state.P)} views but the dataset has {dataset.v}")

    kernel = state.kernels[view_index] if state.kernels else None
    if kernel is None or kernel.kind != "linear":
        raise UnsupportedOperationError(
            f"View '{dataset.names[view_index]}' uses the {kernel} kernel: its centroids live in "
            "an implicit feature space, so F = X P is only available for linear kernels"
        )

    X = dataset.views[view_index].X
    P = state.P[view_index]
    if P.shape[0] != X.shape[1]:
        raise InputError(f"P has {P.shape[0]} rows but view has {X.shape[1]} samples")
    return rank_features(X @ P)
