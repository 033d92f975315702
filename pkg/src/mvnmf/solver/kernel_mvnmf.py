"""
Adaptive weighted kernel multi-view semi-NMF.

For every view a the objective term is

    q_a = ||Phi(X_a) - Phi(X_a) P_a G_a||_F^2 + lambda_a ||G_a - G*||_F^2 + theta_a tr(G_a L_a G_a^T)

and the total objective is sum_a beta_a^gamma q_a with beta on the probability simplex.
The fit term is evaluated through the Gram matrix only:

    tr(K) - 2 tr(K P G) + tr(G^T P^T K P G)

Each outer iteration runs the closed-form P update, projected gradient steps on G with
a certified Lipschitz step, the closed-form consensus update and the closed-form weight
update, so the recorded total objective never increases.

Memberships stay non-negative; with membership="simplex" (the default) every column of G
also lies on the probability simplex.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from mvnmf.config.settings import get_settings
from mvnmf.data.dataset import MultiViewDataset
from mvnmf.errors import InputError, SolverError
from mvnmf.numerics.graph import GraphLaplacian, similarity_graph
from mvnmf.numerics.kernels import KernelSpec, gram_matrix
from mvnmf.numerics.linalg import Membership, lipschitz_bound, project_memberships, spectral_norm
from mvnmf.solver.config import SolverConfig
from mvnmf.utils.logger import get_logger

logger = get_logger(__name__)

LOSS_FLOOR = 1e-12
CLAMP_TOL = 1e-9
DENOMINATOR_FLOOR = 1e-300
MONOTONE_RTOL = 1e-9


@dataclass
class FactorizationState:
    """Per-view factors, consensus, view weights and the optimization history."""

    P: List[np.ndarray]
    G: List[np.ndarray]
    G_star: np.ndarray
    beta: np.ndarray
    objective_trace: List[float] = field(default_factory=list)
    per_view_loss: np.ndarray = field(default_factory=lambda: np.zeros(0))
    q_history: List[np.ndarray] = field(default_factory=list)
    beta_history: List[np.ndarray] = field(default_factory=list)
    kernels: List[KernelSpec] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    restart: int = 0

    @property
    def final_objective(self) -> float:
        return self.objective_trace[-1]

    @property
    def labels(self) -> np.ndarray:
        return assign_clusters(self.G_star)


def _check_shapes(K: np.ndarray, P: np.ndarray, G: np.ndarray, G_star: np.ndarray) -> None:
    n = K.shape[0]
    k = G.shape[0]
    if K.shape != (n, n) or P.shape != (n, k) or G.shape != (k, n) or G_star.shape != (k, n):
        raise InputError(
            f"Shape mismatch: K {K.shape}, P {P.shape}, G {G.shape}, G_star {G_star.shape}"
        )


def fit_loss(K: np.ndarray, P: np.ndarray, G: np.ndarray) -> float:
    """
    Kernel-space reconstruction error ||Phi - Phi P G||_F^2 expressed through K.

    Round-off below zero (relative to tr(K)) is clamped to 0.
    """
    KP = K @ P
    trace_K = float(np.trace(K))
    cross = float(np.sum(KP * G.T))
    quadratic = float(np.sum((P.T @ KP) * (G @ G.T)))
    value = trace_K - 2.0 * cross + quadratic
    if value < 0.0 and value >= -CLAMP_TOL * max(1.0, abs(trace_K)):
        return 0.0
    return value


def view_loss(
    K: np.ndarray,
    P: np.ndarray,
    G: np.ndarray,
    G_star: np.ndarray,
    lambda_a: float,
    theta_a: float,
    laplacian: Optional[GraphLaplacian],
) -> float:
    """
    Per-view objective q_a.

    Args:
        K: n x n Gram matrix
        P: n x k feature coefficients (mixed signs)
        G: k x n memberships
        G_star: k x n consensus
        lambda_a: Consensus weight
        theta_a: Graph weight
        laplacian: Similarity graph of the view (may be None when theta_a is 0)

    Returns:
        Non-negative loss value
    """
    _check_shapes(K, P, G, G_star)
    loss = fit_loss(K, P, G) + lambda_a * float(np.sum((G - G_star) ** 2))
    if theta_a:
        if laplacian is None:
            raise InputError("A graph Laplacian is required when theta > 0")
        loss += theta_a * laplacian.quadratic_form(G)
    return loss


def update_P(K: np.ndarray, G: np.ndarray, ridge: float = 1e-10) -> np.ndarray:
    """
    Closed-form minimizer of the fit term over P: G^T (G G^T + ridge I)^-1.

    Args:
        K: Gram matrix (the minimizer does not depend on it; kept for a uniform signature)
        G: k x n memberships
        ridge: Tikhonov term guarding against vanishing rows of G

    Returns:
        n x k matrix P
    """
    G = np.asarray(G, dtype=float)
    k = G.shape[0]
    if K is not None and K.shape[0] != G.shape[1]:
        raise InputError(f"Shape mismatch: K {K.shape}, G {G.shape}")
    gram = G @ G.T + ridge * np.eye(k)
    try:
        # P^T solves (G G^T + ridge I) P^T = G
        P = np.linalg.solve(gram, G).T
    except np.linalg.LinAlgError as e:
        raise SolverError(
            f"G G^T + ridge*I is singular (ridge={ridge:g}); increase the ridge"
        ) from e
    if not np.all(np.isfinite(P)):
        raise SolverError(f"update_P produced non-finite values (ridge={ridge:g}); increase the ridge")
    return P


def view_gradient(
    K: np.ndarray,
    P: np.ndarray,
    G: np.ndarray,
    G_star: np.ndarray,
    lambda_a: float,
    theta_a: float,
    laplacian: Optional[GraphLaplacian],
) -> np.ndarray:
    """Gradient of q_a with respect to G: 2(P^T K P G - P^T K + lambda(G - G*) + theta G L)."""
    PtK = P.T @ K
    grad = (PtK @ P) @ G - PtK + lambda_a * (G - G_star)
    if theta_a:
        if laplacian is None:
            raise InputError("A graph Laplacian is required when theta > 0")
        grad = grad + theta_a * (G @ laplacian.L)
    return 2.0 * grad


def lipschitz_constant(
    K: np.ndarray,
    P: np.ndarray,
    lambda_a: float,
    theta_a: float,
    laplacian: Optional[GraphLaplacian],
) -> float:
    """Lipschitz constant of the G-gradient: 2[sigma_max(P^T K P) + lambda + theta sigma_max(L)]."""
    PtKP = P.T @ K @ P
    PtKP = (PtKP + PtKP.T) / 2.0
    lips = lipschitz_bound(spectral_norm(PtKP)) + lambda_a
    if theta_a:
        lips += theta_a * laplacian.spectral_radius
    return 2.0 * lips


def pgd_step_G(
    K: np.ndarray,
    P: np.ndarray,
    G: np.ndarray,
    G_star: np.ndarray,
    lambda_a: float,
    theta_a: float,
    laplacian: Optional[GraphLaplacian],
    lips: Optional[float] = None,
    membership: Membership = "nonnegative",
) -> np.ndarray:
    """
    One projected gradient step on G: Proj(G - grad / Lips).

    Args:
        lips: Precomputed Lipschitz constant (computed from the inputs when omitted)
        membership: "nonnegative" clips at zero, "simplex" projects every column onto
            the probability simplex

    Returns:
        Updated non-negative k x n matrix
    """
    _check_shapes(K, P, G, G_star)
    if lips is None:
        lips = lipschitz_constant(K, P, lambda_a, theta_a, laplacian)
    if not lips > 0:
        raise SolverError(f"Non-positive Lipschitz constant {lips}")
    grad = view_gradient(K, P, G, G_star, lambda_a, theta_a, laplacian)
    return project_memberships(G - grad / lips, membership)


def update_G_star(
    G_views: Sequence[np.ndarray],
    beta: np.ndarray,
    lambdas: np.ndarray,
    gamma: float,
) -> np.ndarray:
    """
    Consensus memberships: (sum_a beta_a^gamma lambda_a G_a) / (sum_a beta_a^gamma lambda_a).
    """
    weights = np.power(np.asarray(beta, dtype=float), gamma) * np.asarray(lambdas, dtype=float)
    return weighted_consensus(G_views, weights)


def weighted_consensus(G_views: Sequence[np.ndarray], weights: np.ndarray) -> np.ndarray:
    """Weighted average of membership matrices; weights must not all vanish."""
    denominator = float(np.sum(weights))
    if denominator < DENOMINATOR_FLOOR:
        raise SolverError("All consensus weights vanished (sum of beta^gamma * lambda is zero)")
    numerator = np.zeros_like(G_views[0], dtype=float)
    for weight, G in zip(weights, G_views):
        numerator += weight * G
    return np.maximum(numerator / denominator, 0.0)


def update_beta(q: np.ndarray, gamma: float) -> np.ndarray:
    """
    View weights minimizing sum_a beta_a^gamma q_a over the probability simplex.

    gamma > 1 uses the closed form q_a^(1/(1-gamma)) / sum q^(1/(1-gamma)); gamma == 0 is
    uniform; for 0 < gamma <= 1 the minimizer is the vertex at the smallest loss (ties go
    to the lowest view index).

    For 0 < gamma < 1, beta^gamma is concave, so the stationary point of the Lagrangian is
    a maximum over the simplex and the minimum sits at a vertex; gamma == 1 is linear in
    beta and also attains its minimum at a vertex.
    """
    q = np.maximum(np.asarray(q, dtype=float), LOSS_FLOOR)
    v = q.size
    if gamma == 0:
        return np.full(v, 1.0 / v)
    if gamma <= 1:
        beta = np.zeros(v)
        beta[int(np.argmin(q))] = 1.0
        return beta

    exponent = 1.0 / (1.0 - gamma)
    # scale by the smallest loss so the power stays in range
    powered = np.power(q / q.min(), exponent)
    return powered / powered.sum()


def has_converged(initial: float, previous: float, objective: float, rel_tol: float) -> bool:
    """
    Stop once one iteration changes the objective by at most rel_tol times the initial objective.
    """
    return abs(previous - objective) <= rel_tol * max(abs(initial), LOSS_FLOOR)


def assign_clusters(G_star: np.ndarray) -> np.ndarray:
    """Cluster index per sample: argmax over each column, ties toward the lowest row."""
    return np.argmax(np.asarray(G_star), axis=0).astype(np.int64)


def _view_weights(beta: np.ndarray, gamma: float, weighting: str) -> np.ndarray:
    if weighting == "equal":
        return np.ones_like(beta)
    return np.power(beta, gamma)


class KernelMultiViewNMF:
    """
    Alternating optimizer for the adaptive weighted kernel multi-view objective.

    Gram matrices and graph Laplacians are built once per dataset; restarts share them.
    """

    def __init__(self, config: SolverConfig, threads: Optional[int] = None):
        self.config = config
        self.threads = threads or get_settings().threads

    def prepare(self, dataset: MultiViewDataset):
        """Resolve kernels and build the per-view Gram matrices and Laplacians."""
        cfg = self.config
        if cfg.k > dataset.n:
            raise InputError(f"k={cfg.k} exceeds the number of samples n={dataset.n}")

        kernels = [spec.resolve(X) for spec, X in zip(cfg.kernels_for(dataset.v), dataset.matrices)]
        grams = [gram_matrix(spec, X) for spec, X in zip(kernels, dataset.matrices)]
        thetas = cfg.thetas_for(dataset.v)
        laplacians = [
            similarity_graph(X, cfg.graph_sigma) if theta > 0 else None
            for X, theta in zip(dataset.matrices, thetas)
        ]
        return kernels, grams, laplacians

    def fit(self, dataset: MultiViewDataset) -> FactorizationState:
        """
        Run all restarts and keep the one with the lowest final objective.

        Returns:
            FactorizationState of the best restart
        """
        cfg = self.config
        kernels, grams, laplacians = self.prepare(dataset)
        seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)

        def run(index: int) -> FactorizationState:
            state = self._fit_restart(grams, laplacians, np.random.default_rng(seeds[index]))
            state.restart = index
            state.kernels = kernels
            logger.debug(
                f"Restart {index}: objective {state.final_objective:.10g}, "
                f"{state.iterations} iteration(s), converged={state.converged}"
            )
            return state

        if self.threads > 1 and cfg.restarts > 1:
            states = Parallel(n_jobs=self.threads, prefer="threads")(delayed(run)(i) for i in range(cfg.restarts))
        else:
            states = [run(i) for i in range(cfg.restarts)]

        best = min(states, key=lambda s: s.final_objective)
        logger.info(
            f"Best of {cfg.restarts} restart(s): #{best.restart}, objective {best.final_objective:.6g} "
            f"after {best.iterations} iteration(s), beta={np.round(best.beta, 4).tolist()}"
        )
        return best

    def _losses(self, grams, P, G, G_star, lambdas, thetas, laplacians) -> np.ndarray:
        q = np.empty(len(grams))
        for a, K in enumerate(grams):
            q[a] = view_loss(K, P[a], G[a], G_star, lambdas[a], thetas[a], laplacians[a])
            if not np.isfinite(q[a]):
                raise SolverError(f"Non-finite objective in view {a}; check its kernel configuration")
        return q

    def _fit_restart(
        self,
        grams: List[np.ndarray],
        laplacians: List[Optional[GraphLaplacian]],
        rng: np.random.Generator,
    ) -> FactorizationState:
        cfg = self.config
        v = len(grams)
        n = grams[0].shape[0]
        lambdas = cfg.lambdas_for(v)
        thetas = cfg.thetas_for(v)

        G = [rng.uniform(0.0, 1.0, size=(cfg.k, n)) for _ in range(v)]
        if cfg.membership == "simplex":
            G = [G_a / G_a.sum(axis=0) for G_a in G]
        P = [update_P(K, G_a, cfg.ridge) for K, G_a in zip(grams, G)]
        G_star = np.mean(G, axis=0)
        beta = np.full(v, 1.0 / v)

        q = self._losses(grams, P, G, G_star, lambdas, thetas, laplacians)
        weights = _view_weights(beta, cfg.gamma, cfg.weighting)
        state = FactorizationState(P=P, G=G, G_star=G_star, beta=beta)
        state.objective_trace.append(float(weights @ q))
        state.q_history.append(q)
        state.beta_history.append(beta)

        for iteration in range(1, cfg.max_iter + 1):
            for a, K in enumerate(grams):
                P[a] = update_P(K, G[a], cfg.ridge)
                lips = lipschitz_constant(K, P[a], lambdas[a], thetas[a], laplacians[a])
                for _ in range(cfg.inner_pgd_steps):
                    G[a] = pgd_step_G(
                        K, P[a], G[a], G_star, lambdas[a], thetas[a], laplacians[a], lips=lips,
                        membership=cfg.membership,
                    )

            if cfg.weighting == "adaptive":
                G_star = update_G_star(G, beta, lambdas, cfg.gamma)
            else:
                G_star = weighted_consensus(G, lambdas)
            q = self._losses(grams, P, G, G_star, lambdas, thetas, laplacians)
            if cfg.weighting == "adaptive":
                beta = update_beta(q, cfg.gamma)
            weights = _view_weights(beta, cfg.gamma, cfg.weighting)
            objective = float(weights @ q)

            previous = state.objective_trace[-1]
            state.objective_trace.append(objective)
            state.q_history.append(q)
            state.beta_history.append(beta)
            state.iterations = iteration
            logger.debug(f"iter {iteration}: objective={objective:.10g}")

            if objective > previous + MONOTONE_RTOL * abs(previous):
                logger.warning(
                    f"Objective increased at iteration {iteration}: {previous:.12g} -> {objective:.12g}"
                )
            if has_converged(state.objective_trace[0], previous, objective, cfg.rel_tol):
                state.converged = True
                break

        state.P, state.G, state.G_star, state.beta, state.per_view_loss = P, G, G_star, beta, q
        return state


def fit(dataset: MultiViewDataset, config: SolverConfig, threads: Optional[int] = None) -> FactorizationState:
    """
    Fit the adaptive weighted kernel multi-view model.

    Args:
        dataset: Views over the same n samples
        config: Solver hyperparameters
        threads: Worker threads for restarts (defaults to settings)

    Returns:
        FactorizationState of the restart with the lowest final objective
    """
    return KernelMultiViewNMF(config, threads=threads).fit(dataset)
