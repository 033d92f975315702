"""
Spectral-norm estimation for symmetric matrices and projections for membership matrices.
"""

from typing import Literal, NamedTuple, Optional

import numpy as np

from mvnmf.config.settings import get_settings
from mvnmf.errors import InputError
from mvnmf.utils.logger import get_logger

logger = get_logger(__name__)

SYMMETRY_TOL = 1e-10
NON_CONVERGED_INFLATION = 1.10


class SpectralNormEstimate(NamedTuple):
    """Largest absolute eigenvalue of a symmetric matrix."""

    value: float
    converged: bool
    iterations: int


def spectral_norm(
    M: np.ndarray,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    seed: int = 0,
) -> SpectralNormEstimate:
    """
    Largest singular value of a symmetric matrix.

    Small matrices (dimension at most ``exact_eigen_max_dim``) go through an exact
    symmetric eigensolve. Larger ones use power iteration from a seeded random start,
    stopping when successive Rayleigh-quotient estimates differ by less than ``tol``.

    Args:
        M: Symmetric n x n matrix
        tol: Convergence tolerance (defaults to settings)
        max_iter: Iteration budget (defaults to settings)
        seed: Seed for the random start vector

    Returns:
        SpectralNormEstimate; ``converged`` is False when the budget ran out
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError(f"spectral_norm needs a square matrix, got shape {M.shape}")
    if not np.allclose(M, M.T, rtol=0.0, atol=SYMMETRY_TOL):
        raise InputError("spectral_norm needs a symmetric matrix")

    settings = get_settings()
    tol = settings.spectral_tol if tol is None else tol
    max_iter = settings.spectral_max_iter if max_iter is None else max_iter

    n = M.shape[0]
    if n == 0:
        return SpectralNormEstimate(0.0, True, 0)
    if n <= settings.exact_eigen_max_dim:
        eigenvalues = np.linalg.eigvalsh(M)
        return SpectralNormEstimate(float(np.max(np.abs(eigenvalues))), True, 0)

    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)

    estimate = 0.0
    best = 0.0
    for iteration in range(1, max_iter + 1):
        y = M @ x
        y_norm = np.linalg.norm(y)
        if y_norm == 0.0:
            # start vector fell into the null space
            x = rng.standard_normal(n)
            x /= np.linalg.norm(x)
            continue

        rayleigh = abs(float(x @ y))
        # ||Mx|| for a unit x is also a lower bound on the norm
        best = max(best, rayleigh, float(y_norm))
        x = y / y_norm

        if iteration > 1 and abs(rayleigh - estimate) < tol:
            return SpectralNormEstimate(best, True, iteration)
        estimate = rayleigh

    logger.warning(f"Power iteration did not converge in {max_iter} steps (n={n})")
    return SpectralNormEstimate(best, False, max_iter)


def lipschitz_bound(estimate: SpectralNormEstimate) -> float:
    """Spectral norm usable in a step size: inflated by 10% when not converged."""
    if estimate.converged:
        return estimate.value
    return estimate.value * NON_CONVERGED_INFLATION


Membership = Literal["simplex", "nonnegative"]


def project_simplex_columns(Y: np.ndarray) -> np.ndarray:
    """
    Euclidean projection of every column of Y onto the probability simplex.

    Sort-and-threshold: with u the column sorted in decreasing order and rho the last
    index where u_j > (sum_{i<=j} u_i - 1) / j, subtract that threshold and clip at zero.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2:
        raise InputError(f"project_simplex_columns needs a matrix, got shape {Y.shape}")
    k = Y.shape[0]
    U = np.sort(Y, axis=0)[::-1]
    thresholds = (np.cumsum(U, axis=0) - 1.0) / np.arange(1, k + 1)[:, None]
    rho = np.sum(U > thresholds, axis=0) - 1
    tau = thresholds[rho, np.arange(Y.shape[1])]
    return np.maximum(Y - tau, 0.0)


def project_memberships(Y: np.ndarray, membership: Membership = "nonnegative") -> np.ndarray:
    """Project onto the non-negative orthant or onto column-stochastic matrices."""
    if membership == "simplex":
        return project_simplex_columns(Y)
    if membership == "nonnegative":
        return np.maximum(Y, 0.0)
    raise InputError(f"Unknown membership constraint '{membership}'")
