"""
Solver hyperparameters shared by the kernel solver and the baselines.
"""

from typing import List, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from mvnmf.errors import InputError
from mvnmf.numerics.graph import Bandwidth
from mvnmf.numerics.kernels import KernelSpec
from mvnmf.numerics.linalg import Membership

PerView = Union[float, List[float]]


class SolverConfig(BaseModel):
    """
    Hyperparameters of the alternating optimization.

    ``lambdas``, ``thetas`` and ``kernels`` accept either one value for every view or a
    list with one entry per view; use the ``*_for(v)`` accessors to broadcast.
    """

    model_config = ConfigDict(frozen=True)

    k: int = Field(ge=2, description="Number of clusters")
    lambdas: PerView = Field(default=1.0, description="Consensus weights lambda_a > 0")
    thetas: PerView = Field(default=1.0, description="Graph weights theta_a >= 0")
    gamma: float = Field(default=2.0, ge=0.0, description="Order of the view weights")
    kernels: Union[KernelSpec, List[KernelSpec]] = Field(default_factory=KernelSpec.linear)
    graph_sigma: Bandwidth = "local"
    membership: Membership = Field(
        default="simplex", description="Column constraint on the kernel solver memberships"
    )
    weighting: Literal["adaptive", "equal"] = "adaptive"
    max_iter: int = Field(default=100, ge=1)
    rel_tol: float = Field(default=1e-6, ge=0.0)
    inner_pgd_steps: int = Field(default=10, ge=1)
    restarts: int = Field(default=10, ge=1)
    ridge: float = Field(default=1e-10, ge=0.0)
    seed: int = Field(default=0, ge=0)

    @field_validator("lambdas")
    @classmethod
    def _positive_lambdas(cls, v: PerView) -> PerView:
        values = v if isinstance(v, list) else [v]
        if not values or any(not x > 0 for x in values):
            raise ValueError(f"every lambda must be positive, got {v}")
        return v

    @field_validator("thetas")
    @classmethod
    def _nonnegative_thetas(cls, v: PerView) -> PerView:
        values = v if isinstance(v, list) else [v]
        if not values or any(x < 0 for x in values):
            raise ValueError(f"every theta must be non-negative, got {v}")
        return v

    @field_validator("kernels", mode="before")
    @classmethod
    def _parse_kernels(cls, v):
        if isinstance(v, (list, tuple)):
            return [KernelSpec.parse(item) for item in v]
        return KernelSpec.parse(v)

    @field_validator("graph_sigma")
    @classmethod
    def _positive_graph_sigma(cls, v):
        if v not in ("auto", "local") and not v > 0:
            raise ValueError(f"graph_sigma must be positive, 'auto' or 'local', got {v}")
        return v

    @staticmethod
    def _broadcast(name: str, value, v: int) -> list:
        if isinstance(value, list):
            if len(value) != v:
                raise InputError(f"{name} has {len(value)} entries but the dataset has {v} views")
            return list(value)
        return [value] * v

    def lambdas_for(self, v: int) -> np.ndarray:
        return np.asarray(self._broadcast("lambdas", self.lambdas, v), dtype=float)

    def thetas_for(self, v: int) -> np.ndarray:
        return np.asarray(self._broadcast("thetas", self.thetas, v), dtype=float)

    def kernels_for(self, v: int) -> List[KernelSpec]:
        return self._broadcast("kernels", self.kernels, v)
