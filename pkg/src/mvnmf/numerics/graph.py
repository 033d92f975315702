"""
Sample-similarity graph and graph Laplacian.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal, Union

import numpy as np
from scipy.spatial.distance import pdist, squareform

from mvnmf.errors import InputError
from mvnmf.numerics.linalg import lipschitz_bound, spectral_norm

Bandwidth = Union[float, Literal["auto", "local"]]

LOCAL_NEIGHBOR = 7


def median_pairwise_distance(X: np.ndarray) -> float:
    """
    Median Euclidean distance over all sample pairs (columns of X).

    Returns 1.0 when the median is zero or there is a single sample.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[1] < 2:
        return 1.0
    median = float(np.median(pdist(X.T, metric="euclidean")))
    return median if median > 0.0 else 1.0


def local_scale(X: np.ndarray, neighbor: int = LOCAL_NEIGHBOR) -> float:
    """
    Median over samples of the distance to the ``neighbor``-th nearest other sample.

    Tracks the within-cluster spacing rather than the spread of the whole cloud, so
    samples from well separated groups get near-zero similarity. Falls back to the
    median pairwise distance when the neighbour distances vanish.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[1]
    if n < 2:
        return 1.0
    p = min(neighbor, n - 1)
    dists = squareform(pdist(X.T, metric="euclidean"))
    # column 0 of the sorted rows is the zero self-distance
    scale = float(np.median(np.sort(dists, axis=1)[:, p]))
    return scale if scale > 0.0 else median_pairwise_distance(X)


@dataclass(frozen=True, eq=False)
class GraphLaplacian:
    """
    Similarity matrix W, degrees D (row sums of W) and Laplacian L = diag(D) - W.

    Self-similarity W(i, i) = 1 is kept; it cancels in L.
    """

    W: np.ndarray
    D: np.ndarray
    L: np.ndarray
    sigma: float = field(default=1.0)

    @property
    def n(self) -> int:
        return self.L.shape[0]

    @cached_property
    def spectral_radius(self) -> float:
        """sigma_max(L), computed once and reused for every step size."""
        return lipschitz_bound(spectral_norm(self.L))

    def quadratic_form(self, G: np.ndarray) -> float:
        """tr(G L G^T) for a k x n matrix G."""
        return float(np.sum((G @ self.L) * G))


def similarity_graph(X: np.ndarray, sigma_w: Bandwidth = "auto") -> GraphLaplacian:
    """
    Gaussian similarity graph over the columns of X.

    W(i, j) = exp(-||x_i - x_j||^2 / (2 sigma_w^2)); with ``sigma_w="auto"`` the bandwidth
    is the median pairwise distance, with ``sigma_w="local"`` it is ``local_scale(X)``.

    Args:
        X: m x n data matrix, columns are samples
        sigma_w: Positive bandwidth, "auto" or "local"

    Returns:
        GraphLaplacian
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] < 2:
        raise InputError(f"similarity_graph needs at least 2 samples, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InputError("similarity_graph input contains non-finite entries")

    if sigma_w == "auto":
        sigma = median_pairwise_distance(X)
    elif sigma_w == "local":
        sigma = local_scale(X)
    else:
        sigma = float(sigma_w)
        if not sigma > 0:
            raise InputError(f"Graph bandwidth must be positive, got {sigma_w}")

    sq_dists = squareform(pdist(X.T, metric="sqeuclidean"))
    W = np.exp(-sq_dists / (2.0 * sigma**2))
    degrees = W.sum(axis=1)
    L = np.diag(degrees) - W
    return GraphLaplacian(W=W, D=degrees, L=L, sigma=sigma)
