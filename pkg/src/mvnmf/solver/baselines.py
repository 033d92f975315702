"""
Comparison methods on the original (non-kernel) features.

- GNMF: ||X - F G||^2 + theta tr(G L G^T), single view
- CNMF: GNMF on the row-wise concatenation of all views
- MNMF: sum_a {||X_a - F_a G_a||^2 + lambda_a ||G_a - G*||^2 + theta_a tr(G_a L_a G_a^T)}
- AWMNMF: the MNMF terms weighted by beta_a^gamma with beta on the simplex

All four are optimized by alternating projected gradient steps with Lipschitz step sizes
(F-step: 2 sigma_max(G G^T); G-step: 2[sigma_max(F^T F) + lambda_a + theta_a sigma_max(L)]),
followed by the exact consensus and weight updates, so every objective trace is
non-increasing. F and G are kept entrywise non-negative, which requires non-negative data.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed

from mvnmf.config.settings import get_settings
from mvnmf.data.dataset import MultiViewDataset
from mvnmf.errors import InputError, SolverError
from mvnmf.numerics.graph import GraphLaplacian, similarity_graph
from mvnmf.numerics.linalg import lipschitz_bound, spectral_norm
from mvnmf.solver.config import SolverConfig
from mvnmf.solver.kernel_mvnmf import (
    assign_clusters,
    has_converged,
    update_beta,
    weighted_consensus,
)
from mvnmf.utils.logger import get_logger

logger = get_logger(__name__)

BASELINE_METHODS = ("sv", "cnmf", "mnmf", "awmnmf")


@dataclass
class BaselineResult:
    """Factors, consensus, weights and history of one baseline fit."""

    F: List[np.ndarray]
    G: List[np.ndarray]
    G_star: np.ndarray
    beta: np.ndarray
    objective_trace: List[float] = field(default_factory=list)
    q_history: List[np.ndarray] = field(default_factory=list)
    beta_history: List[np.ndarray] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    restart: int = 0

    @property
    def final_objective(self) -> float:
        return self.objective_trace[-1]

    @property
    def labels(self) -> np.ndarray:
        return assign_clusters(self.G_star)


def _require_nonnegative(X: np.ndarray, name: str) -> None:
    if np.any(X < 0):
        raise InputError(
            f"View '{name}' has negative entries; NMF baselines need non-negative data, "
            "apply min-max scaling (scale: minmax) first"
        )


def nmf_loss(
    X: np.ndarray,
    F: np.ndarray,
    G: np.ndarray,
    G_star: Optional[np.ndarray] = None,
    lambda_a: float = 0.0,
    theta_a: float = 0.0,
    laplacian: Optional[GraphLaplacian] = None,
) -> float:
    """Bracketed per-view loss ||X - F G||^2 + lambda ||G - G*||^2 + theta tr(G L G^T)."""
    loss = float(np.sum((X - F @ G) ** 2))
    if G_star is not None and lambda_a:
        loss += lambda_a * float(np.sum((G - G_star) ** 2))
    if theta_a:
        loss += theta_a * laplacian.quadratic_form(G)
    return loss


def nmf_f_step(X: np.ndarray, F: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Projected gradient step on F with step 1 / (2 sigma_max(G G^T))."""
    GGt = G @ G.T
    lips = 2.0 * lipschitz_bound(spectral_norm(GGt))
    if lips <= 0.0:
        # G vanished: the fit term no longer depends on F
        return F
    grad = 2.0 * (F @ GGt - X @ G.T)
    return np.maximum(F - grad / lips, 0.0)


def nmf_g_step(
    X: np.ndarray,
    F: np.ndarray,
    G: np.ndarray,
    G_star: Optional[np.ndarray] = None,
    lambda_a: float = 0.0,
    theta_a: float = 0.0,
    laplacian: Optional[GraphLaplacian] = None,
) -> np.ndarray:
    """Projected gradient step on G with step 1 / (2[sigma_max(F^T F) + lambda + theta sigma_max(L)])."""
    FtF = F.T @ F
    lips = lipschitz_bound(spectral_norm(FtF))
    grad = FtF @ G - F.T @ X
    if G_star is not None and lambda_a:
        lips += lambda_a
        grad = grad + lambda_a * (G - G_star)
    if theta_a:
        if laplacian is None:
            raise InputError("A graph Laplacian is required when theta > 0")
        lips += theta_a * laplacian.spectral_radius
        grad = grad + theta_a * (G @ laplacian.L)
    if lips <= 0.0:
        return G
    # grad and lips both omit the common factor 2
    return np.maximum(G - grad / lips, 0.0)


def _best_of_restarts(
    run: Callable[[np.random.Generator, int], BaselineResult], config: SolverConfig, label: str
) -> BaselineResult:
    seeds = np.random.SeedSequence(config.seed).spawn(config.restarts)
    threads = get_settings().threads

    def one(index: int) -> BaselineResult:
        result = run(np.random.default_rng(seeds[index]), index)
        result.restart = index
        return result

    if threads > 1 and config.restarts > 1:
        results = Parallel(n_jobs=threads, prefer="threads")(delayed(one)(i) for i in range(config.restarts))
    else:
        results = [one(i) for i in range(config.restarts)]

    best = min(results, key=lambda r: r.final_objective)
    logger.info(
        f"{label}: best of {config.restarts} restart(s) #{best.restart}, "
        f"objective {best.final_objective:.6g} after {best.iterations} iteration(s)"
    )
    return best


def _multiview_pgd(
    matrices: List[np.ndarray],
    k: int,
    lambdas: np.ndarray,
    thetas: np.ndarray,
    laplacians: List[Optional[GraphLaplacian]],
    config: SolverConfig,
    rng: np.random.Generator,
    gamma: Optional[float],
    consensus: bool,
    init: Optional[Tuple[List[np.ndarray], List[np.ndarray]]] = None,
) -> BaselineResult:
    """
    Shared alternating loop.

    ``consensus=False`` drops the lambda coupling (single-view GNMF). ``gamma=None``
    keeps unit view weights (MNMF); otherwise beta is updated in closed form (AWMNMF).
    """
    v = len(matrices)
    n = matrices[0].shape[1]
    if init is not None:
        F = [np.array(f, dtype=float) for f in init[0]]
        G = [np.array(g, dtype=float) for g in init[1]]
    else:
        F = [rng.uniform(0.0, 1.0, size=(X.shape[0], k)) for X in matrices]
        G = [rng.uniform(0.0, 1.0, size=(k, n)) for _ in range(v)]

    beta = np.full(v, 1.0 / v)

    def weights() -> np.ndarray:
        return np.ones(v) if gamma is None else np.power(beta, gamma)

    G_star = weighted_consensus(G, weights() * lambdas) if consensus else G[0]
    lam = lambdas if consensus else np.zeros(v)

    def losses() -> np.ndarray:
        return np.array(
            [
                nmf_loss(X, F[a], G[a], G_star, lam[a], thetas[a], laplacians[a])
                for a, X in enumerate(matrices)
            ]
        )

    q = losses()
    result = BaselineResult(F=F, G=G, G_star=G_star, beta=beta)
    result.objective_trace.append(float(weights() @ q))
    result.q_history.append(q)
    result.beta_history.append(beta)

    for iteration in range(1, config.max_iter + 1):
        for a, X in enumerate(matrices):
            F[a] = nmf_f_step(X, F[a], G[a])
            G[a] = nmf_g_step(X, F[a], G[a], G_star, lam[a], thetas[a], laplacians[a])

        G_star = weighted_consensus(G, weights() * lambdas) if consensus else G[0]
        q = losses()
        if not np.all(np.isfinite(q)):
            bad = int(np.flatnonzero(~np.isfinite(q))[0])
            raise SolverError(f"Non-finite objective in view {bad}")
        if gamma is not None:
            beta = update_beta(q, gamma)

        previous = result.objective_trace[-1]
        objective = float(weights() @ q)
        result.objective_trace.append(objective)
        result.q_history.append(q)
        result.beta_history.append(beta)
        result.iterations = iteration

        if has_converged(result.objective_trace[0], previous, objective, config.rel_tol):
            result.converged = True
            break

    result.F, result.G, result.G_star, result.beta = F, G, G_star, beta
    return result


def _graphs(matrices: List[np.ndarray], thetas: np.ndarray, config: SolverConfig):
    return [
        similarity_graph(X, config.graph_sigma) if theta > 0 else None
        for X, theta in zip(matrices, thetas)
    ]


def gnmf_fit(
    X: np.ndarray,
    k: int,
    theta: float,
    config: SolverConfig,
    init: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    laplacian: Optional[GraphLaplacian] = None,
) -> BaselineResult:
    """
    Single-view graph-regularized NMF.

    Args:
        X: m x n non-negative data
        k: Number of clusters
        theta: Graph weight
        config: Iteration budget, tolerance, restarts, seed and graph bandwidth
        init: Optional starting (F, G); disables restarts
        laplacian: Optional precomputed similarity graph

    Returns:
        BaselineResult with F[0] (m x k) and G[0] (k x n)
    """
    X = np.asarray(X, dtype=float)
    _require_nonnegative(X, "X")
    if k > min(X.shape):
        raise InputError(f"k={k} exceeds min(m, n)={min(X.shape)}")
    if laplacian is None and theta > 0:
        laplacian = similarity_graph(X, config.graph_sigma)
    thetas = np.array([theta], dtype=float)

    def run(rng: np.random.Generator, _: int) -> BaselineResult:
        start = None if init is None else ([init[0]], [init[1]])
        return _multiview_pgd(
            [X], k, np.zeros(1), thetas, [laplacian], config, rng, None, False, start
        )

    if init is not None:
        return run(np.random.default_rng(config.seed), 0)
    return _best_of_restarts(run, config, "gnmf")


def concat_views(dataset: MultiViewDataset) -> np.ndarray:
    """Row-wise stack of all views in order (m_total x n)."""
    return np.vstack(dataset.matrices)


def sv_fit(dataset: MultiViewDataset, view_index: int, config: SolverConfig) -> BaselineResult:
    """GNMF on one view of the dataset."""
    if not 0 <= view_index < dataset.v:
        raise InputError(f"view_index {view_index} out of range for {dataset.v} views")
    theta = float(config.thetas_for(dataset.v)[view_index])
    view = dataset.views[view_index]
    _require_nonnegative(view.X, view.name)
    return gnmf_fit(view.X, config.k, theta, config)


def cnmf_fit(dataset: MultiViewDataset, config: SolverConfig) -> BaselineResult:
    """GNMF on the concatenated features; theta is the first view's value."""
    for view in dataset.views:
        _require_nonnegative(view.X, view.name)
    theta = float(config.thetas_for(dataset.v)[0])
    return gnmf_fit(concat_views(dataset), config.k, theta, config)


def _prepare_multiview(dataset: MultiViewDataset, config: SolverConfig):
    for view in dataset.views:
        _require_nonnegative(view.X, view.name)
    if config.k > min(min(X.shape) for X in dataset.matrices):
        raise InputError(f"k={config.k} exceeds the smallest view dimension")
    lambdas = config.lambdas_for(dataset.v)
    thetas = config.thetas_for(dataset.v)
    return dataset.matrices, lambdas, thetas, _graphs(dataset.matrices, thetas, config)


def mnmf_fit(
    dataset: MultiViewDataset,
    config: SolverConfig,
    init: Optional[Tuple[List[np.ndarray], List[np.ndarray]]] = None,
) -> BaselineResult:
    """
    Multi-view NMF with a consensus membership matrix and equal view weights.

    Args:
        dataset: Non-negative views
        config: k, lambdas, thetas, iteration budget and seed
        init: Optional starting (F list, G list); disables restarts

    Returns:
        BaselineResult (beta stays uniform)
    """
    matrices, lambdas, thetas, laplacians = _prepare_multiview(dataset, config)

    def run(rng: np.random.Generator, _: int) -> BaselineResult:
        return _multiview_pgd(
            matrices, config.k, lambdas, thetas, laplacians, config, rng, None, True, init
        )

    if init is not None:
        return run(np.random.default_rng(config.seed), 0)
    return _best_of_restarts(run, config, "mnmf")


def awmnmf_fit(
    dataset: MultiViewDataset,
    config: SolverConfig,
    init: Optional[Tuple[List[np.ndarray], List[np.ndarray]]] = None,
) -> BaselineResult:
    """
    Adaptive weighted multi-view NMF: MNMF terms weighted by beta^gamma, beta learned.

    With gamma = 0 every weight is 1 and the trajectory equals :func:`mnmf_fit`.
    """
    matrices, lambdas, thetas, laplacians = _prepare_multiview(dataset, config)

    def run(rng: np.random.Generator, _: int) -> BaselineResult:
        return _multiview_pgd(
            matrices, config.k, lambdas, thetas, laplacians, config, rng, config.gamma, True, init
        )

    if init is not None:
        return run(np.random.default_rng(config.seed), 0)
    return _best_of_restarts(run, config, "awmnmf")
