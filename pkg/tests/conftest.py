"""
Pytest configuration and shared fixtures.
"""

import tempfile
from pathlib import Path

import numpy as np
import pytest

from mvnmf.config.settings import Settings, reset_settings
from mvnmf.data.synthetic import make_blobs, make_rings
from mvnmf.solver.config import SolverConfig


@pytest.fixture
def temp_dir():
    """Create a temporary directory for tests."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def test_settings(temp_dir):
    """Create test settings with temporary directories."""
    reset_settings()

    settings = Settings(
        project_root=temp_dir,
        output_dir=temp_dir / "outputs",
        log_to_file=False,  # Don't create log files in tests
    )

    return settings


@pytest.fixture
def rng():
    """Seeded random generator."""
    return np.random.default_rng(12345)


@pytest.fixture
def blobs():
    """Two informative views, three planted clusters, 30 samples."""
    return make_blobs(v=2, k=3, n=30, dims=4, spread=0.1, seed=7)


@pytest.fixture
def small_blobs():
    """Tiny two-view dataset for fast solver runs."""
    return make_blobs(v=2, k=2, n=12, dims=3, spread=0.1, seed=3)


@pytest.fixture
def rings():
    """Concentric rings in two views."""
    return make_rings(v=2, n=40, noise=0.05, seed=11)


@pytest.fixture
def fast_config():
    """Solver settings with a small budget."""
    return SolverConfig(k=2, max_iter=15, restarts=2, seed=0)


def write_yaml(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


@pytest.fixture
def blobs_yaml(temp_dir):
    """Single-grid-point experiment on a small blobs dataset."""
    return write_yaml(
        temp_dir / "experiment.yaml",
        "\n".join(
            [
                "method: kernel_mvnmf",
                "generator: blobs",
                "gen_views: 2",
                "gen_clusters: 2",
                "gen_samples: 16",
                "gen_dims: 3",
                "gen_spread: 0.1",
                "k: 2",
                "max_iter: 10",
                "restarts: 2",
                "n_seeds: 2",
                "seed: 5",
                "output_dir: out",
                "",
            ]
        ),
    )


@pytest.fixture(autouse=True)
def reset_settings_after_test():
    """Reset settings after each test."""
    yield
    reset_settings()
