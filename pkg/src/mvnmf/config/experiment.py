"""
Experiment files: flat YAML mappings validated into an ExperimentConfig.

Relative paths are resolved against the directory of the YAML file. Unknown keys and
nested mappings are rejected.
"""

import itertools
from pathlib import Path
from typing import Any, Dict, List, Literal, NamedTuple, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from mvnmf.data.dataset import MultiViewDataset, load_dataset, minmax_scale
from mvnmf.data.synthetic import make_blobs, make_rings
from mvnmf.errors import InputError, StorageError
from mvnmf.numerics.graph import Bandwidth
from mvnmf.numerics.kernels import KernelSpec
from mvnmf.numerics.linalg import Membership
from mvnmf.solver.config import PerView, SolverConfig
from mvnmf.utils.logger import get_logger

logger = get_logger(__name__)

METHODS = ("kernel_mvnmf", "sv", "cnmf", "mnmf", "awmnmf")
Method = Literal["kernel_mvnmf", "sv", "cnmf", "mnmf", "awmnmf"]
GridList = Optional[Union[Literal["standard"], List[float]]]


def standard_sigma_grid() -> List[float]:
    """Gaussian bandwidths exp(-2), exp(-1), ..., exp(10)."""
    return np.exp(np.arange(-2, 11, dtype=float)).tolist()


def standard_degree_grid() -> List[int]:
    return [1, 2, 3]


class GridPoint(NamedTuple):
    """One hyperparameter combination of an experiment grid."""

    grid_id: str
    lambdas: PerView
    thetas: PerView
    gamma: float
    kernels: Union[KernelSpec, List[KernelSpec]]

    def describe(self) -> str:
        return (
            f"lambda={format_per_view(self.lambdas)}, theta={format_per_view(self.thetas)}, "
            f"gamma={self.gamma:g}, kernel={format_kernels(self.kernels)}"
        )


def format_per_view(value: PerView) -> str:
    if isinstance(value, list):
        return ";".join(f"{x:g}" for x in value)
    return f"{value:g}"


def format_kernels(kernels: Union[KernelSpec, List[KernelSpec]]) -> str:
    if isinstance(kernels, list):
        return ";".join(str(k) for k in kernels)
    return str(kernels)


class ExperimentConfig(BaseModel):
    """Validated experiment description (dataset, method, hyperparameters, grid)."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True, frozen=True)

    method: Method = "kernel_mvnmf"

    # Dataset from files
    views: Optional[List[Path]] = None
    view_names: Optional[List[str]] = None
    labels: Optional[Path] = None

    # Synthetic dataset
    generator: Optional[Literal["blobs", "rings"]] = None
    gen_views: int = Field(default=2, ge=1)
    gen_clusters: int = Field(default=3, ge=2)
    gen_samples: int = Field(default=60, ge=2)
    gen_dims: Union[int, List[int]] = 5
    gen_spread: float = Field(default=0.1, ge=0.0)
    gen_noise: float = Field(default=0.05, ge=0.0)
    gen_noise_views: int = Field(default=0, ge=0)

    # Solver
    k: Optional[int] = Field(default=None, ge=2)
    lambda_: PerView = Field(default=1.0, alias="lambda")
    theta: PerView = 1.0
    gamma: float = Field(default=2.0, ge=0.0)
    kernel: Union[str, List[str]] = "linear"
    poly_c: float = Field(default=1.0, ge=0.0)
    graph_sigma: Bandwidth = "local"
    membership: Membership = "simplex"
    max_iter: int = Field(default=100, ge=1)
    rel_tol: float = Field(default=1e-6, ge=0.0)
    inner_pgd_steps: int = Field(default=10, ge=1)
    restarts: int = Field(default=10, ge=1)
    ridge: float = Field(default=1e-10, ge=0.0)
    seed: int = Field(default=0, ge=0)
    n_seeds: int = Field(default=10, ge=1)
    scale: Literal["none", "minmax"] = "none"
    view_index: Optional[int] = Field(default=None, ge=0)

    # Grid
    grid_lambda: Optional[List[float]] = None
    grid_theta: Optional[List[float]] = None
    grid_gamma: Optional[List[float]] = None
    grid_sigma: GridList = None
    grid_degree: Optional[Union[Literal["standard"], List[int]]] = None

    # Comparison
    methods: Optional[List[Method]] = None

    output_dir: Optional[Path] = None

    @field_validator("kernel")
    @classmethod
    def _parse_kernel(cls, v):
        for text in v if isinstance(v, list) else [v]:
            try:
                KernelSpec.parse(text)
            except InputError as e:
                raise ValueError(str(e)) from e
        return v

    @field_validator("grid_lambda", "grid_theta", "grid_gamma", "grid_sigma", "grid_degree", "methods")
    @classmethod
    def _non_empty(cls, v, info):
        if isinstance(v, list) and not v:
            raise ValueError(f"{info.field_name} must not be empty when present")
        return v

    @model_validator(mode="after")
    def _check_consistency(self) -> "ExperimentConfig":
        if (self.views is None) == (self.generator is None):
            raise ValueError("exactly one of 'views' or 'generator' must be given")
        if self.method == "sv" and self.view_index is None:
            raise ValueError("method 'sv' requires view_index")
        if self.k is None and self.generator is None:
            raise ValueError("k is required when the dataset comes from files")
        if self.grid_lambda is not None and any(x <= 0 for x in self.grid_lambda):
            raise ValueError("grid_lambda values must be positive")
        if self.grid_theta is not None and any(x < 0 for x in self.grid_theta):
            raise ValueError("grid_theta values must be non-negative")
        if self.grid_gamma is not None and any(x < 0 for x in self.grid_gamma):
            raise ValueError("grid_gamma values must be non-negative")
        return self

    @classmethod
    def from_yaml(cls, path: Union[str, Path], **overrides: Any) -> "ExperimentConfig":
        """
        Load and validate an experiment file.

        Args:
            path: YAML file with a flat mapping
            **overrides: Values replacing file entries (None values are ignored)

        Returns:
            Validated ExperimentConfig
        """
        path = Path(path)
        if not path.exists():
            raise StorageError(f"Config file not found: {path}")
        try:
            with open(path, "r", encoding="utf-8") as f:
                raw = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise InputError(f"{path}: invalid YAML: {e}") from e

        raw = {} if raw is None else raw
        if not isinstance(raw, dict):
            raise InputError(f"{path}: expected a mapping of keys to values")
        for key, value in raw.items():
            if isinstance(value, dict):
                raise InputError(f"{path}: key '{key}' holds a nested mapping; only flat keys are allowed")

        raw = _resolve_paths(raw, path.parent)
        # overrides come from the command line and stay relative to the working directory
        raw.update({key: value for key, value in overrides.items() if value is not None})
        logger.debug(f"Loaded experiment config from {path}")
        return cls.from_mapping(raw, source=str(path))

    @classmethod
    def from_mapping(cls, raw: Dict[str, Any], source: str = "<config>") -> "ExperimentConfig":
        try:
            return cls.model_validate(raw)
        except ValidationError as e:
            problems = "; ".join(
                f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()
            )
            raise InputError(f"{source}: {problems}") from e

    @property
    def effective_k(self) -> int:
        return self.k if self.k is not None else self.gen_clusters

    @property
    def compare_methods(self) -> List[str]:
        return list(self.methods) if self.methods else list(METHODS[1:]) + [METHODS[0]]

    def build_dataset(self) -> MultiViewDataset:
        """Load or generate the dataset, then apply the configured scaling."""
        if self.generator == "blobs":
            dataset = make_blobs(
                self.gen_views, self.gen_clusters, self.gen_samples, self.gen_dims,
                self.gen_spread, self.seed, noise_views=self.gen_noise_views,
            )
        elif self.generator == "rings":
            dataset = make_rings(self.gen_views, self.gen_samples, self.gen_noise, self.seed)
        else:
            dataset = load_dataset(self.views, self.labels, self.view_names)

        if self.scale == "minmax":
            dataset = minmax_scale(dataset)
        return dataset

    def kernel_variants(self) -> List[Union[KernelSpec, List[KernelSpec]]]:
        """Kernel settings to sweep: sigma grid, then degree grid, else the configured kernel."""
        variants: List[Union[KernelSpec, List[KernelSpec]]] = []
        if self.grid_sigma is not None:
            sigmas = standard_sigma_grid() if self.grid_sigma == "standard" else self.grid_sigma
            variants.extend(KernelSpec.gaussian(float(s)) for s in sigmas)
        if self.grid_degree is not None:
            degrees = standard_degree_grid() if self.grid_degree == "standard" else self.grid_degree
            variants.extend(KernelSpec.polynomial(self.poly_c, int(d)) for d in degrees)
        if variants:
            return variants
        if isinstance(self.kernel, list):
            return [[self._kernel_spec(text) for text in self.kernel]]
        return [self._kernel_spec(self.kernel)]

    def _kernel_spec(self, text: str) -> KernelSpec:
        spec = KernelSpec.parse(text)
        # a bare "polynomial" picks up poly_c
        if spec.kind == "polynomial" and "c=" not in text:
            spec = KernelSpec.polynomial(self.poly_c, spec.d)
        return spec

    def grid(self) -> List[GridPoint]:
        """Cartesian product over (lambda, theta, gamma, kernel variant), ids g000, g001, ..."""
        lambdas = self.grid_lambda or [self.lambda_]
        thetas = self.grid_theta or [self.theta]
        gammas = self.grid_gamma or [self.gamma]
        product = itertools.product(lambdas, thetas, gammas, self.kernel_variants())
        return [
            GridPoint(f"g{i:03d}", lam, theta, float(gamma), kernels)
            for i, (lam, theta, gamma, kernels) in enumerate(product)
        ]

    def solver_config(self, point: Optional[GridPoint] = None, seed: Optional[int] = None) -> SolverConfig:
        """SolverConfig for a grid point (the first one by default) and seed."""
        point = point or self.grid()[0]
        try:
            return SolverConfig(
                k=self.effective_k,
                lambdas=point.lambdas,
                thetas=point.thetas,
                gamma=point.gamma,
                kernels=point.kernels,
                graph_sigma=self.graph_sigma,
                membership=self.membership,
                max_iter=self.max_iter,
                rel_tol=self.rel_tol,
                inner_pgd_steps=self.inner_pgd_steps,
                restarts=self.restarts,
                ridge=self.ridge,
                seed=self.seed if seed is None else seed,
            )
        except ValidationError as e:
            raise InputError(f"Invalid solver settings for {point.describe()}: {e}") from e

    def run_seeds(self) -> List[int]:
        """n_seeds solver seeds derived deterministically from ``seed``."""
        return [int(s) for s in np.random.SeedSequence(self.seed).generate_state(self.n_seeds)]


def _resolve_paths(raw: Dict[str, Any], base: Path) -> Dict[str, Any]:
    def resolve(value):
        p = Path(value)
        return p if p.is_absolute() else base / p

    resolved = dict(raw)
    if isinstance(resolved.get("views"), list):
        resolved["views"] = [resolve(v) for v in resolved["views"]]
    for key in ("labels", "output_dir"):
        if isinstance(resolved.get(key), (str, Path)):
            resolved[key] = resolve(resolved[key])
    return resolved
