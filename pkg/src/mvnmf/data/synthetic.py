"""
Seeded synthetic multi-view datasets with planted clusters.
"""

from typing import Sequence, Union

import numpy as np
from scipy.spatial.distance import pdist

from mvnmf.data.dataset import MultiViewDataset, View
from mvnmf.errors import InputError
from mvnmf.utils.logger import get_logger

logger = get_logger(__name__)

CENTROID_SEPARATION = 10.0
INNER_RADIUS = 1.0
OUTER_RADIUS = 3.0


def _balanced_labels(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    """Labels 0..k-1 with counts differing by at most one, in random order."""
    return rng.permutation(np.arange(n) % k).astype(np.int64)


def _separated_centroids(rng: np.random.Generator, k: int, dim: int, spread: float) -> np.ndarray:
    """
    k centroids (dim x k) whose pairwise distances are all at least 10 * spread.

    Centroids are drawn uniformly in the unit cube and rescaled so the closest pair sits
    exactly at the required separation (or at distance 1 when spread is 0).
    """
    target = CENTROID_SEPARATION * spread if spread > 0 else 1.0
    for _ in range(100):
        centroids = rng.uniform(0.0, 1.0, size=(dim, k))
        closest = float(pdist(centroids.T).min()) if k > 1 else 1.0
        if closest > 1e-9:
            return centroids * (target / closest)
    raise InputError(f"Could not place {k} distinct centroids in {dim} dimensions")


def make_blobs(
    v: int,
    k: int,
    n: int,
    dims: Union[int, Sequence[int]],
    spread: float,
    seed: int,
    noise_views: int = 0,
) -> MultiViewDataset:
    """
    Gaussian blobs sharing one balanced labelling across views.

    Each view gets its own k centroids with pairwise distance >= 10 * spread; points are
    centroid + N(0, spread^2) noise. ``noise_views`` extra views of pure N(0, 1) noise
    (unrelated to the labels) are appended after the informative ones.

    Args:
        v: Number of informative views
        k: Number of clusters
        n: Number of samples (at least 2k)
        dims: Feature dimension, one value for all views or one per view
        spread: Noise scale around each centroid
        seed: Random seed
        noise_views: Number of pure-noise views to append

    Returns:
        MultiViewDataset with labels
    """
    dims = [dims] * v if isinstance(dims, int) else list(dims)
    if v < 1 or k < 1 or noise_views < 0:
        raise InputError(f"make_blobs needs v >= 1, k >= 1, noise_views >= 0 (got {v}, {k}, {noise_views})")
    if n < 2 * k:
        raise InputError(f"make_blobs needs n >= 2k, got n={n}, k={k}")
    if len(dims) != v or any(d < 1 for d in dims):
        raise InputError(f"make_blobs needs {v} positive dimensions, got {dims}")
    if spread < 0:
        raise InputError(f"spread must be non-negative, got {spread}")

    rng = np.random.default_rng(seed)
    labels = _balanced_labels(rng, n, k)

    views = []
    for a, dim in enumerate(dims):
        centroids = _separated_centroids(rng, k, dim, spread)
        X = centroids[:, labels] + spread * rng.standard_normal((dim, n))
        views.append(View(name=f"blobs{a}", X=X))
    for a in range(noise_views):
        X = rng.standard_normal((dims[a % v], n))
        views.append(View(name=f"noise{a}", X=X))

    logger.debug(f"Generated blobs: v={v}+{noise_views}, k={k}, n={n}, spread={spread}, seed={seed}")
    return MultiViewDataset(views=views, labels=labels)


def make_rings(v: int, n: int, noise: float, seed: int) -> MultiViewDataset:
    """
    Two concentric circles (radii 1 and 3) in two dimensions per view.

    Half of the samples sit on the inner ring (label 0), half on the outer ring (label 1);
    every view draws its own angles and radial N(0, noise^2) perturbations.

    Args:
        v: Number of views
        n: Even number of samples, at least 8
        noise: Radial noise scale
        seed: Random seed

    Returns:
        MultiViewDataset with binary labels
    """
    if v < 1:
        raise InputError(f"make_rings needs v >= 1, got {v}")
    if n < 8 or n % 2:
        raise InputError(f"make_rings needs an even n >= 8, got {n}")
    if noise < 0:
        raise InputError(f"noise must be non-negative, got {noise}")

    rng = np.random.default_rng(seed)
    labels = _balanced_labels(rng, n, 2)
    base_radius = np.where(labels == 0, INNER_RADIUS, OUTER_RADIUS)

    views = []
    for a in range(v):
        angles = rng.uniform(0.0, 2.0 * np.pi, size=n)
        radius = base_radius + noise * rng.standard_normal(n)
        X = np.vstack([radius * np.cos(angles), radius * np.sin(angles)])
        views.append(View(name=f"rings{a}", X=X))

    logger.debug(f"Generated rings: v={v}, n={n}, noise={noise}, seed={seed}")
    return MultiViewDataset(views=views, labels=labels)
