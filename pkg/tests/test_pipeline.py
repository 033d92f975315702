"""
Tests for the experiment runner.
"""

import numpy as np
import pandas as pd
import pytest

from mvnmf.config.experiment import ExperimentConfig
from mvnmf.errors import InputError, SolverError
from mvnmf.pipeline import ExperimentRunner, fit_method, trace_frame, trace_view_names
from mvnmf.solver.config import SolverConfig
from mvnmf.utils.storage import read_comments, read_table

SMALL = {
    "generator": "blobs",
    "gen_views": 2,
    "gen_clusters": 2,
    "gen_samples": 12,
    "gen_dims": 3,
    "gen_spread": 0.1,
    "max_iter": 5,
    "restarts": 1,
    "n_seeds": 2,
    "seed": 1,
}


def make_runner(temp_dir, name="out", **values):
    config = ExperimentConfig.from_mapping({**SMALL, **values})
    return ExperimentRunner(config, output_dir=temp_dir / name, threads=1)


def test_runner_initialization(temp_dir):
    """Test the runner owns its output directory and starts with empty stats."""
    runner = make_runner(temp_dir)

    assert runner.store.root == temp_dir / "out"
    assert runner.store.root.exists()
    assert runner.stats.fits_performed == 0


def test_run_experiment_single_point(temp_dir):
    """Test one grid point writes metrics, trace and assignments."""
    runner = make_runner(temp_dir)

    metrics = runner.run_experiment()

    assert len(metrics) == 1
    for name in ["accuracy", "nmi", "rand_index", "mirkin_index"]:
        assert f"{name}_mean" in metrics.columns
        assert f"{name}_std" in metrics.columns
    assert metrics.loc[0, "n_seeds"] == 2
    assert metrics.loc[0, "kernel"] == "linear"

    written = read_table(runner.store.path("metrics.csv"))
    assert written["grid_id"].tolist() == ["g000"]
    assert read_comments(runner.store.path("metrics.csv"))[0].startswith("mvnmf")

    trace = read_table(runner.store.path("trace_g000.csv"))
    assert list(trace.columns) == ["seed", "iteration", "objective", "q_blobs0", "q_blobs1", "beta_blobs0", "beta_blobs1"]
    assert trace["seed"].nunique() == 2
    assert (trace.groupby("seed")["iteration"].min() == 0).all()

    assignments = read_table(runner.store.path("assignments_g000.csv"))
    assert assignments["sample"].tolist() == list(range(12))
    assert set(assignments["cluster"]) <= {0, 1}

    assert runner.stats.grid_succeeded == 1
    assert runner.stats.fits_performed == 2


def test_metrics_consistency(temp_dir):
    """Test Mirkin is the complement of Rand in the averaged row."""
    metrics = make_runner(temp_dir).run_experiment()

    assert metrics.loc[0, "mirkin_index_mean"] == pytest.approx(1.0 - metrics.loc[0, "rand_index_mean"])
    assert 0.0 <= metrics.loc[0, "accuracy_mean"] <= 1.0


def test_standard_sigma_grid_rows(temp_dir):
    """Test the named bandwidth grid produces 13 rows with distinct ids."""
    runner = make_runner(temp_dir, grid_sigma="standard", max_iter=2, n_seeds=1, gen_samples=8)

    metrics = runner.run_experiment()

    assert len(metrics) == 13
    assert metrics["grid_id"].tolist() == [f"g{i:03d}" for i in range(13)]
    assert all(kernel.startswith("gaussian:sigma=") for kernel in metrics["kernel"])
    assert len(list(runner.store.root.glob("trace_*.csv"))) == 13


def test_reruns_are_byte_identical(temp_dir):
    """Test identical config and seed reproduce every artifact byte for byte."""
    first = make_runner(temp_dir, "first", grid_gamma=[0.0, 2.0], kernel="gaussian:sigma=auto")
    second = make_runner(temp_dir, "second", grid_gamma=[0.0, 2.0], kernel="gaussian:sigma=auto")
    first.run_experiment()
    second.run_experiment()

    names = sorted(p.name for p in first.store.root.iterdir())
    assert names == sorted(p.name for p in second.store.root.iterdir())
    for name in names:
        assert (first.store.root / name).read_bytes() == (second.store.root / name).read_bytes()


def test_failed_point_keeps_partial_results(temp_dir):
    """Test a failing grid point re-raises with its id and keeps earlier rows."""
    # the second degree overflows the Gram matrix
    runner = make_runner(temp_dir, grid_degree=[1, 2000], n_seeds=1)

    with pytest.raises(SolverError, match="grid point g001"):
        runner.run_experiment()

    written = read_table(runner.store.path("metrics.csv"))
    assert written["grid_id"].tolist() == ["g000"]
    assert runner.stats.grid_failed == 1
    assert runner.stats.errors


def test_unlabelled_dataset_has_no_metric_columns(temp_dir):
    """Test file datasets without labels still report objectives."""
    paths = make_runner(temp_dir, "data").generate()
    views = [str(p) for p in paths if p.name.startswith("view_")]
    config = ExperimentConfig.from_mapping({"views": views, "k": 2, "max_iter": 3, "restarts": 1, "n_seeds": 1})

    metrics = ExperimentRunner(config, output_dir=temp_dir / "run", threads=1).run_experiment()

    assert "accuracy_mean" not in metrics.columns
    assert "objective_mean" in metrics.columns


def test_compare_methods_layout(temp_dir):
    """Test the comparison table has one column per method and the four metric rows."""
    runner = make_runner(temp_dir, scale="minmax", methods=["sv", "cnmf", "mnmf", "awmnmf", "kernel_mvnmf"])

    table = runner.compare_methods()

    assert list(table.index) == ["Acc", "NMI", "RI", "MI"]
    assert list(table.columns) == ["sv_blobs0", "sv_blobs1", "cnmf", "mnmf", "awmnmf", "kernel_mvnmf"]
    assert ((table >= 0.0) & (table <= 100.0)).all().all()
    np.testing.assert_allclose(table.loc["MI"] + table.loc["RI"], 100.0, atol=0.011)

    written = read_table(runner.store.path("comparison.csv"))
    assert written.columns[0] == "metric"
    assert written["metric"].tolist() == ["Acc", "NMI", "RI", "MI"]


def test_compare_single_view_sv_equals_cnmf(temp_dir):
    """Test the concatenation of one view scores like that view."""
    runner = make_runner(temp_dir, gen_views=1, scale="minmax", methods=["sv", "cnmf"])

    table = runner.compare_methods()

    pd.testing.assert_series_equal(table["sv_blobs0"], table["cnmf"], check_names=False)


def test_compare_needs_labels(temp_dir):
    """Test comparisons without ground truth are rejected."""
    paths = make_runner(temp_dir, "data").generate()
    views = [str(p) for p in paths if p.name.startswith("view_")]
    config = ExperimentConfig.from_mapping({"views": views, "k": 2})

    with pytest.raises(InputError, match="labels"):
        ExperimentRunner(config, output_dir=temp_dir / "run", threads=1).compare_methods()


def test_importance_writes_linear_views(temp_dir):
    """Test every linear view gets a ranking file."""
    runner = make_runner(temp_dir)

    rankings = runner.importance()

    assert sorted(rankings) == ["blobs0", "blobs1"]
    ranking = read_table(runner.store.path("importance_blobs0.csv"))
    assert list(ranking.columns) == ["rank", "feature", "importance"]
    assert len(ranking) == 3


def test_importance_without_linear_views(temp_dir):
    """Test all-Gaussian configurations cannot be explained."""
    runner = make_runner(temp_dir, kernel="gaussian:sigma=auto")

    with pytest.raises(InputError, match="linear"):
        runner.importance()


def test_generate(temp_dir):
    """Test the synthetic dataset is written in the ingestion format."""
    runner = make_runner(temp_dir)

    paths = runner.generate()

    assert [p.name for p in paths] == ["view_blobs0.csv", "view_blobs1.csv", "labels.csv"]
    assert all(p.exists() for p in paths)


def test_generate_needs_generator(temp_dir):
    """Test gen is rejected for file datasets."""
    paths = make_runner(temp_dir, "data").generate()
    config = ExperimentConfig.from_mapping({"views": [str(paths[0])], "k": 2})

    with pytest.raises(InputError, match="generator"):
        ExperimentRunner(config, output_dir=temp_dir / "run").generate()


class TestHelpers:
    """Tests for the module-level helpers."""

    def test_trace_view_names(self, small_blobs):
        """Test per-view trace columns follow the method."""
        assert trace_view_names("kernel_mvnmf", small_blobs, None) == ["blobs0", "blobs1"]
        assert trace_view_names("sv", small_blobs, 1) == ["blobs1"]
        assert trace_view_names("cnmf", small_blobs, None) == ["concat"]

    def test_trace_frame(self, small_blobs, fast_config):
        """Test the trace frame has one row per recorded iteration."""
        fitted = fit_method("kernel_mvnmf", small_blobs, fast_config)
        frame = trace_frame(fitted, 7, small_blobs.names)

        assert len(frame) == len(fitted.objective_trace)
        assert frame["seed"].unique().tolist() == [7]
        np.testing.assert_allclose(frame[["beta_blobs0", "beta_blobs1"]].sum(axis=1), 1.0)

    def test_unknown_method(self, small_blobs):
        """Test unknown methods are input errors."""
        with pytest.raises(InputError):
            fit_method("kmeans", small_blobs, SolverConfig(k=2))

    def test_sv_requires_view_index(self, small_blobs):
        """Test the single-view method needs a view."""
        with pytest.raises(InputError):
            fit_method("sv", small_blobs, SolverConfig(k=2))


@pytest.mark.slow
def test_gaussian_kernel_beats_mnmf_on_rings(temp_dir):
    """Test the Gaussian kernel solver beats MNMF accuracy on concentric rings."""
    config = ExperimentConfig.from_mapping(
        {
            "generator": "rings",
            "gen_samples": 200,
            "k": 2,
            "kernel": "gaussian:sigma=auto",
            "scale": "minmax",
            "methods": ["mnmf", "kernel_mvnmf"],
            "n_seeds": 10,
        }
    )

    table = ExperimentRunner(config, output_dir=temp_dir / "rings").compare_methods()

    assert table.loc["Acc", "kernel_mvnmf"] > table.loc["Acc", "mnmf"]
