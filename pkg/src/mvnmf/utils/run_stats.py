"""
Run statistics for experiment commands.
Tracks grid points, fits, failures and phase timings.
"""

from dataclasses import dataclass, field
from typing import Dict, List

from mvnmf.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class RunStats:
    """Container for experiment execution statistics."""

    # Grid
    grid_points: int = 0
    grid_succeeded: int = 0
    grid_failed: int = 0

    # Fits
    fits_performed: int = 0
    fits_converged: int = 0
    total_iterations: int = 0

    # Artifacts
    artifacts_written: int = 0

    # Timing
    total_duration_seconds: float = 0.0
    phase_durations: Dict[str, float] = field(default_factory=dict)

    # Errors
    errors: List[str] = field(default_factory=list)

    def add_error(self, error: str) -> None:
        """Record an error message."""
        self.errors.append(error)
        logger.warning(f"Run error recorded: {error}")

    def record_fit(self, iterations: int, converged: bool) -> None:
        self.fits_performed += 1
        self.total_iterations += iterations
        if converged:
            self.fits_converged += 1

    def record_phase_duration(self, phase: str, duration: float) -> None:
        """Record duration for a run phase."""
        self.phase_durations[phase] = self.phase_durations.get(phase, 0.0) + duration
        logger.debug(f"Phase '{phase}' completed in {duration:.2f}s")

    @property
    def grid_success_rate(self) -> float:
        total = self.grid_succeeded + self.grid_failed
        if total == 0:
            return 0.0
        return (self.grid_succeeded / total) * 100

    @property
    def convergence_rate(self) -> float:
        if self.fits_performed == 0:
            return 0.0
        return (self.fits_converged / self.fits_performed) * 100

    @property
    def mean_iterations(self) -> float:
        if self.fits_performed == 0:
            return 0.0
        return self.total_iterations / self.fits_performed

    def summary(self) -> Dict:
        """Generate summary dictionary for reporting."""
        return {
            "grid": {
                "points": self.grid_points,
                "succeeded": self.grid_succeeded,
                "failed": self.grid_failed,
                "success_rate_pct": round(self.grid_success_rate, 2),
            },
            "fits": {
                "performed": self.fits_performed,
                "converged": self.fits_converged,
                "convergence_rate_pct": round(self.convergence_rate, 2),
                "mean_iterations": round(self.mean_iterations, 2),
            },
            "artifacts_written": self.artifacts_written,
            "performance": {
                "total_duration_seconds": round(self.total_duration_seconds, 2),
                "phase_durations": {k: round(v, 2) for k, v in self.phase_durations.items()},
            },
            "errors": {
                "count": len(self.errors),
                "messages": self.errors[:10],
            },
        }

    def log_summary(self) -> None:
        """Log run summary."""
        logger.info("=" * 60)
        logger.info("RUN SUMMARY")
        logger.info("=" * 60)
        logger.info(
            f"Grid points: {self.grid_succeeded}/{self.grid_points} succeeded "
            f"({self.grid_success_rate:.1f}%)"
        )
        logger.info(
            f"Fits: {self.fits_performed}, converged {self.fits_converged} "
            f"({self.convergence_rate:.1f}%), mean iterations {self.mean_iterations:.1f}"
        )
        logger.info(f"Artifacts written: {self.artifacts_written}")
        logger.info(f"Total duration: {self.total_duration_seconds:.2f}s")
        if self.errors:
            logger.warning(f"Errors encountered: {len(self.errors)}")
        logger.info("=" * 60)
