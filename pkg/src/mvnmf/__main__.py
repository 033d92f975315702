"""
CLI entry point for kernel multi-view NMF experiments.
Usage: python -m mvnmf [command] [options]
"""

import sys
from pathlib import Path

import click

from mvnmf import __version__
from mvnmf.config.experiment import ExperimentConfig
from mvnmf.config.settings import get_settings
from mvnmf.errors import MvnmfError, exit_code_for
from mvnmf.pipeline import ExperimentRunner
from mvnmf.utils.logger import get_logger, setup_logger

# Initialize logger
setup_logger()
logger = get_logger(__name__)


COMMON_OPTIONS = [
    click.option(
        "--config",
        "-c",
        "config_path",
        type=click.Path(path_type=Path),
        default=None,
        help="Experiment YAML file (defaults to configs/experiment.yaml)",
    ),
    click.option("--seed", type=click.IntRange(min=0), default=None, help="Base seed (overrides config)"),
    click.option(
        "--out",
        "-o",
        "out",
        type=click.Path(path_type=Path),
        default=None,
        help="Output directory (overrides config)",
    ),
]


def common_options(func):
    """--config, --seed and --out, shared by every experiment command."""
    for option in reversed(COMMON_OPTIONS):
        func = option(func)
    return func


def _load(config_path, seed, out) -> ExperimentConfig:
    path = config_path or get_settings().default_config_path
    return ExperimentConfig.from_yaml(path, seed=seed, output_dir=out)


def _execute(action):
    """Run an action, mapping library errors to categorized messages and exit codes."""
    try:
        return action()
    except KeyboardInterrupt:
        logger.warning("Interrupted by user")
        sys.exit(130)
    except MvnmfError as e:
        logger.debug(f"{type(e).__name__}: {e}")
        click.echo(f"error[{e.category}]: {e}", err=True)
        sys.exit(exit_code_for(e))
    except Exception as e:
        logger.exception("Unexpected failure:")
        click.echo(f"error[internal]: {e}", err=True)
        sys.exit(1)


@click.group()
@click.version_option(version=__version__, prog_name="mvnmf")
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default=None,
    help="Set logging level (overrides settings)",
)
def cli(log_level):
    """
    Kernel multi-view NMF - adaptive weighted multi-view clustering experiments.

    Fits the kernel solver or one of the NMF baselines over a seeded hyperparameter grid
    and writes plot-ready CSV reports.
    """
    if log_level:
        setup_logger(log_level.upper())


@cli.command()
@common_options
def run(config_path, seed, out):
    """
    Run the configured method over the hyperparameter grid.

    Example:
        python -m mvnmf run --config configs/experiment.yaml --out outputs/run1
    """

    def action():
        config = _load(config_path, seed, out)
        runner = ExperimentRunner(config)
        metrics = runner.run_experiment()
        logger.success(f"Wrote {len(metrics)} grid point(s) to {runner.store.root}")

    _execute(action)


@cli.command()
@common_options
def compare(config_path, seed, out):
    """
    Compare every method on the same dataset and seed set (Acc, NMI, RI, MI in %).

    Example:
        python -m mvnmf compare --config configs/compare.yaml
    """

    def action():
        config = _load(config_path, seed, out)
        runner = ExperimentRunner(config)
        table = runner.compare_methods()
        click.echo(table.to_string(float_format=lambda x: f"{x:.2f}"))

    _execute(action)


@cli.command()
@common_options
@click.option("--view-index", type=click.IntRange(min=0), default=None, help="Only rank this view")
@click.option("--top", "-n", type=int, default=10, help="Number of features to print per view")
def importance(config_path, seed, out, view_index, top):
    """Rank the features of linear-kernel views by the magnitude of F = X P."""

    def action():
        config = _load(config_path, seed, out)
        runner = ExperimentRunner(config)
        rankings = runner.importance(view_index=view_index if view_index is not None else config.view_index)
        for name, ranking in rankings.items():
            click.echo(f"\nView {name}:")
            click.echo(ranking.head(top).to_string(index=False))

    _execute(action)


@cli.command()
@common_options
def gen(config_path, seed, out):
    """Write the configured synthetic dataset (view_<name>.csv, labels.csv)."""

    def action():
        config = _load(config_path, seed, out)
        paths = ExperimentRunner(config).generate()
        for path in paths:
            click.echo(str(path))

    _execute(action)


@cli.command("show-config")
@click.option(
    "--config",
    "-c",
    "config_path",
    type=click.Path(path_type=Path),
    default=None,
    help="Also validate and print this experiment file",
)
def show_config(config_path):
    """Show the current settings (and optionally an experiment file)."""
    settings = get_settings()

    click.echo("\nCurrent Configuration:")
    click.echo(f"  Log Level: {settings.log_level}")
    click.echo(f"  Threads: {settings.threads}")
    click.echo(f"  Output Dir: {settings.output_dir}")
    click.echo(f"  Spectral tolerance: {settings.spectral_tol:g}")
    click.echo(f"  Spectral max iterations: {settings.spectral_max_iter}")
    click.echo(f"  Exact eigensolver up to n = {settings.exact_eigen_max_dim}")

    if config_path is not None:

        def action():
            config = ExperimentConfig.from_yaml(config_path)
            click.echo(f"\nExperiment ({config_path}):")
            for key, value in config.model_dump(by_alias=True, exclude_none=True).items():
                click.echo(f"  {key}: {value}")
            click.echo(f"  grid points: {len(config.grid())}")

        _execute(action)


if __name__ == "__main__":
    cli()
