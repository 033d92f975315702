"""
Process-level settings using Pydantic Settings.
Supports environment variables (MVNMF_*) and a .env file.
"""

from pathlib import Path
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Runtime settings with validation and type safety."""

    model_config = SettingsConfigDict(
        env_prefix="MVNMF_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Paths
    project_root: Path = Field(default_factory=lambda: Path(__file__).parent.parent.parent.parent)
    output_dir: Path = Field(default_factory=lambda: Path("outputs"))
    config_dir: Path = Field(default_factory=lambda: Path("configs"))

    # Logging
    log_level: str = Field(default="INFO", description="Logging level (DEBUG, INFO, WARNING, ERROR)")
    log_to_file: bool = Field(default=False, description="Whether to log to file")
    log_file: str = Field(default="outputs/mvnmf.log", description="Log file path")

    # Execution
    threads: int = Field(
        default=1, ge=1, description="Worker threads for solver restarts"
    )

    # Numerical defaults
    spectral_tol: float = Field(
        default=1e-7, gt=0, description="Power-iteration tolerance on Rayleigh quotients"
    )
    spectral_max_iter: int = Field(default=1000, ge=1, description="Power-iteration budget")
    exact_eigen_max_dim: int = Field(
        default=64, ge=0, description="Largest dimension solved with an exact eigensolver"
    )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        v_upper = v.upper()
        if v_upper not in valid_levels:
            raise ValueError(f"log_level must be one of {valid_levels}")
        return v_upper

    def ensure_directories(self) -> None:
        """Create the output directory if it doesn't exist."""
        self.output_dir.mkdir(parents=True, exist_ok=True)

    @property
    def default_config_path(self) -> Path:
        """Path to the bundled default experiment file."""
        return self.project_root / self.config_dir / "experiment.yaml"

    def __repr__(self) -> str:
        return f"Settings(log_level={self.log_level}, threads={self.threads})"


# Global settings instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get or create global settings instance."""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def reset_settings() -> None:
    """Reset settings (mainly for testing)."""
    global _settings
    _settings = None
