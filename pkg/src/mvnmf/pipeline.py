"""
Experiment runner: method dispatch, seeded grid search and report emission.
"""

import time
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from mvnmf import __version__
from mvnmf.config.experiment import ExperimentConfig, GridPoint, format_kernels, format_per_view
from mvnmf.config.settings import get_settings
from mvnmf.data.dataset import MultiViewDataset, write_dataset
from mvnmf.errors import InputError, MvnmfError
from mvnmf.evaluation.clustering import MetricsReport, evaluate
from mvnmf.evaluation.importance import feature_importance
from mvnmf.solver.baselines import BaselineResult, awmnmf_fit, cnmf_fit, mnmf_fit, sv_fit
from mvnmf.solver.config import SolverConfig
from mvnmf.solver.kernel_mvnmf import FactorizationState, KernelMultiViewNMF
from mvnmf.utils.logger import LogTimer, get_logger
from mvnmf.utils.run_stats import RunStats
from mvnmf.utils.storage import ArtifactStore

logger = get_logger(__name__)

Fitted = Union[FactorizationState, BaselineResult]

METRIC_FIELDS = ["accuracy", "nmi", "rand_index", "mirkin_index"]
COMPARISON_ROWS = {"Acc": "accuracy", "NMI": "nmi", "RI": "rand_index", "MI": "mirkin_index"}


def fit_method(
    method: str,
    dataset: MultiViewDataset,
    config: SolverConfig,
    view_index: Optional[int] = None,
    threads: Optional[int] = None,
) -> Fitted:
    """
    Fit one clustering method.

    Args:
        method: kernel_mvnmf, sv, cnmf, mnmf or awmnmf
        dataset: Dataset to cluster
        config: Solver hyperparameters (including the seed)
        view_index: View used by ``sv``
        threads: Worker threads for restarts of the kernel solver

    Returns:
        Fitted state exposing labels, objective_trace, q_history and beta_history
    """
    if method == "kernel_mvnmf":
        return KernelMultiViewNMF(config, threads=threads).fit(dataset)
    if method == "sv":
        if view_index is None:
            raise InputError("method 'sv' requires view_index")
        return sv_fit(dataset, view_index, config)
    if method == "cnmf":
        return cnmf_fit(dataset, config)
    if method == "mnmf":
        return mnmf_fit(dataset, config)
    if method == "awmnmf":
        return awmnmf_fit(dataset, config)
    raise InputError(f"Unknown method '{method}'")


def trace_view_names(method: str, dataset: MultiViewDataset, view_index: Optional[int]) -> List[str]:
    """Names of the per-view columns in a trace for the given method."""
    if method == "sv":
        return [dataset.names[view_index]]
    if method == "cnmf":
        return ["concat"]
    return dataset.names


def trace_frame(fitted: Fitted, seed: int, view_names: List[str]) -> pd.DataFrame:
    """Objective, per-view losses and view weights per iteration (iteration 0 is the start)."""
    q = np.vstack(fitted.q_history)
    beta = np.vstack(fitted.beta_history)
    frame = pd.DataFrame(
        {
            "seed": seed,
            "iteration": np.arange(len(fitted.objective_trace)),
            "objective": fitted.objective_trace,
        }
    )
    for a, name in enumerate(view_names):
        frame[f"q_{name}"] = q[:, a]
    for a, name in enumerate(view_names):
        frame[f"beta_{name}"] = beta[:, a]
    return frame


class ExperimentRunner:
    """
    Runs the experiment commands for one ExperimentConfig.

    Phases:
        1. Dataset: load or generate, then scale
        2. Fitting: every grid point x seed (or every method x seed for comparisons)
        3. Reporting: write CSV artifacts atomically
    """

    def __init__(
        self,
        config: ExperimentConfig,
        output_dir: Optional[Path] = None,
        threads: Optional[int] = None,
    ):
        """
        Initialize the runner.

        Args:
            config: Validated experiment configuration
            output_dir: Artifact directory (defaults to the config, then settings)
            threads: Worker threads (defaults to settings)
        """
        self.config = config
        self.settings = get_settings()
        self.threads = threads or self.settings.threads
        self.store = ArtifactStore(output_dir or config.output_dir or self.settings.output_dir)
        self.stats = RunStats()
        self._dataset: Optional[MultiViewDataset] = None

        logger.info(f"Experiment runner initialized: method={config.method}, output={self.store.root}")

    @property
    def dataset(self) -> MultiViewDataset:
        if self._dataset is None:
            with LogTimer("Dataset preparation", logger) as timer:
                self._dataset = self.config.build_dataset()
            self.stats.record_phase_duration("dataset", timer.duration)
        return self._dataset

    def _provenance(self, command: str) -> List[str]:
        cfg = self.config
        source = f"generator={cfg.generator}" if cfg.generator else f"views={len(cfg.views)} file(s)"
        return [
            f"mvnmf {__version__} {command}: method={cfg.method} {source} n={self.dataset.n} v={self.dataset.v}",
            f"scale={cfg.scale} (dataset not modified by the grid search) seed={cfg.seed} n_seeds={cfg.n_seeds} "
            f"restarts={cfg.restarts} max_iter={cfg.max_iter} rel_tol={cfg.rel_tol:g}",
        ]

    def _fit(self, method: str, solver_config: SolverConfig) -> Fitted:
        fitted = fit_method(
            method, self.dataset, solver_config, view_index=self.config.view_index, threads=self.threads
        )
        self.stats.record_fit(fitted.iterations, fitted.converged)
        return fitted

    def _write(self, name: str, table: pd.DataFrame, **kwargs) -> Path:
        path = self.store.write_table(name, table, **kwargs)
        self.stats.artifacts_written += 1
        return path

    def _finish(self, start_time: float) -> None:
        self.stats.total_duration_seconds = time.perf_counter() - start_time
        self.stats.log_summary()

    def run_experiment(self) -> pd.DataFrame:
        """
        Fit the configured method at every grid point for every seed.

        Writes ``metrics.csv`` (one row per grid point), ``trace_<id>.csv`` and
        ``assignments_<id>.csv``. On failure the rows finished so far are still written
        and the error is re-raised with the grid point attached.

        Returns:
            The metrics table
        """
        start_time = time.perf_counter()
        cfg = self.config
        dataset = self.dataset
        points = cfg.grid()
        seeds = cfg.run_seeds()
        self.stats.grid_points = len(points)
        logger.info(f"Grid search: {len(points)} point(s) x {len(seeds)} seed(s), method {cfg.method}")

        rows: List[Dict] = []
        try:
            with LogTimer("Grid search", logger) as timer:
                for point in tqdm(points, desc="grid", unit="point", disable=len(points) < 2):
                    try:
                        rows.append(self._run_point(point, seeds))
                    except MvnmfError as e:
                        self.stats.grid_failed += 1
                        self.stats.add_error(f"{point.grid_id}: {e}")
                        raise type(e)(f"grid point {point.grid_id} ({point.describe()}): {e}") from e
                    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
                        self.stats.grid_failed += 1
                        self.stats.add_error(f"{point.grid_id}: {e}")
                        raise MvnmfError(f"grid point {point.grid_id} ({point.describe()}): {e}") from e
                    self.stats.grid_succeeded += 1
            self.stats.record_phase_duration("fitting", timer.duration)
        finally:
            if rows:
                self._write("metrics.csv", pd.DataFrame(rows), comments=self._provenance("run"))
            self._finish(start_time)

        return pd.DataFrame(rows)

    def _run_point(self, point: GridPoint, seeds: List[int]) -> Dict:
        cfg = self.config
        dataset = self.dataset
        view_names = trace_view_names(cfg.method, dataset, cfg.view_index)

        fits: List[Fitted] = []
        reports: List[MetricsReport] = []
        traces = []
        for seed in seeds:
            fitted = self._fit(cfg.method, cfg.solver_config(point, seed=seed))
            fits.append(fitted)
            traces.append(trace_frame(fitted, seed, view_names))
            if dataset.has_labels:
                reports.append(evaluate(dataset.labels, fitted.labels))

        best = int(np.argmin([f.final_objective for f in fits]))
        self._write(f"trace_{point.grid_id}.csv", pd.concat(traces, ignore_index=True))
        self._write(
            f"assignments_{point.grid_id}.csv",
            pd.DataFrame({"sample": np.arange(dataset.n), "cluster": fits[best].labels}),
            comments=[f"seed={seeds[best]} (lowest final objective)"],
        )

        row = {
            "grid_id": point.grid_id,
            "method": cfg.method,
            "lambda": format_per_view(point.lambdas),
            "theta": format_per_view(point.thetas),
            "gamma": point.gamma,
            "kernel": format_kernels(point.kernels),
            "n_seeds": len(seeds),
        }
        for name in METRIC_FIELDS if reports else []:
            values = np.array([getattr(r, name) for r in reports])
            row[f"{name}_mean"] = float(values.mean())
            row[f"{name}_std"] = float(values.std())
        row["objective_mean"] = float(np.mean([f.final_objective for f in fits]))
        row["iterations_mean"] = float(np.mean([f.iterations for f in fits]))

        if reports:
            logger.info(
                f"{point.grid_id} ({point.describe()}): accuracy {row['accuracy_mean']:.4f} "
                f"+/- {row['accuracy_std']:.4f}"
            )
        return row

    def compare_methods(self) -> pd.DataFrame:
        """
        Mean metrics per method over the seed set, as percentages with 2 decimals.

        Columns are ``sv_<view>`` for every view, then the multi-view methods; rows are
        Acc, NMI, RI and MI. Written as ``comparison.csv``.

        Returns:
            The comparison table (index: metric)
        """
        start_time = time.perf_counter()
        cfg = self.config
        dataset = self.dataset
        if not dataset.has_labels:
            raise InputError("compare needs ground-truth labels")
        if len(cfg.grid()) > 1:
            logger.warning("compare uses the base hyperparameters; grid keys are ignored")

        columns: List[tuple] = []
        for method in cfg.compare_methods:
            if method == "sv":
                columns.extend((f"sv_{name}", "sv", a) for a, name in enumerate(dataset.names))
            else:
                columns.append((method, method, None))

        seeds = cfg.run_seeds()
        table: Dict[str, List[float]] = {}
        try:
            with LogTimer("Method comparison", logger) as timer:
                for column, method, view_index in tqdm(columns, desc="methods", unit="method"):
                    reports = []
                    for seed in seeds:
                        solver_config = cfg.solver_config(seed=seed)
                        try:
                            fitted = fit_method(
                                method, dataset, solver_config, view_index=view_index, threads=self.threads
                            )
                        except MvnmfError as e:
                            self.stats.add_error(f"{column}: {e}")
                            raise type(e)(f"method {column} (seed {seed}): {e}") from e
                        self.stats.record_fit(fitted.iterations, fitted.converged)
                        reports.append(evaluate(dataset.labels, fitted.labels))
                    table[column] = [
                        round(100.0 * float(np.mean([getattr(r, field) for r in reports])), 2)
                        for field in COMPARISON_ROWS.values()
                    ]
                    logger.info(f"{column}: Acc {table[column][0]:.2f}%")
            self.stats.record_phase_duration("fitting", timer.duration)
        finally:
            self._finish(start_time)

        frame = pd.DataFrame(table, index=pd.Index(list(COMPARISON_ROWS), name="metric"))
        self._write(
            "comparison.csv",
            frame.reset_index(),
            comments=self._provenance("compare") + [f"mean over {len(seeds)} seed(s), percentages"],
            float_format="%.2f",
        )
        return frame

    def importance(self, view_index: Optional[int] = None) -> Dict[str, pd.DataFrame]:
        """
        Fit the kernel solver once and rank the features of linear-kernel views.

        Args:
            view_index: Single view to explain (all linear views when omitted)

        Returns:
            Ranking table per view name; each is written as ``importance_<view>.csv``
        """
        start_time = time.perf_counter()
        dataset = self.dataset
        with LogTimer("Kernel factorization", logger) as timer:
            state = self._fit("kernel_mvnmf", self.config.solver_config())
        self.stats.record_phase_duration("fitting", timer.duration)

        if view_index is not None:
            indices = [view_index]
        else:
            indices = [a for a, spec in enumerate(state.kernels) if spec.kind == "linear"]
            if not indices:
                raise InputError("No view uses a linear kernel; feature importance needs F = X P")

        rankings = {}
        for a in indices:
            ranking = feature_importance(dataset, state, a)
            name = dataset.names[a]
            self._write(
                f"importance_{name}.csv",
                ranking,
                comments=[f"view={name} kernel={state.kernels[a]} seed={self.config.seed}"],
            )
            rankings[name] = ranking
        self._finish(start_time)
        return rankings

    def generate(self) -> List[Path]:
        """Write the configured synthetic dataset in the ingestion format."""
        if self.config.generator is None:
            raise InputError("gen needs a 'generator' entry in the config")
        paths = write_dataset(self.dataset, self.store.root)
        self.stats.artifacts_written += len(paths)
        return paths
