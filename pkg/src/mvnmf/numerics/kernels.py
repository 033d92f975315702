"""
Kernel functions and Gram matrices.

Data matrices follow the m x n convention: rows are features, columns are samples.
"""

from typing import Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.spatial.distance import cdist

from mvnmf.errors import InputError
from mvnmf.numerics.graph import median_pairwise_distance

Bandwidth = Union[float, Literal["auto"]]

KERNEL_KINDS = ("linear", "polynomial", "gaussian")
_ALIASES = {"poly": "polynomial", "rbf": "gaussian"}


class KernelSpec(BaseModel):
    """
    Kernel family with its hyperparameters.

    ``c`` and ``d`` are used by the polynomial kernel, ``sigma`` by the Gaussian one.
    A Gaussian ``sigma`` of ``"auto"`` is resolved against data with :meth:`resolve`.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["linear", "polynomial", "gaussian"] = "linear"
    c: float = Field(default=1.0, ge=0.0)
    d: int = Field(default=2, ge=1)
    sigma: Bandwidth = "auto"

    @model_validator(mode="after")
    def _check_sigma(self) -> "KernelSpec":
        if self.sigma != "auto" and not self.sigma > 0:
            raise ValueError(f"Gaussian sigma must be positive, got {self.sigma}")
        return self

    @classmethod
    def linear(cls) -> "KernelSpec":
        return cls(kind="linear")

    @classmethod
    def polynomial(cls, c: float = 1.0, d: int = 2) -> "KernelSpec":
        return cls(kind="polynomial", c=c, d=d)

    @classmethod
    def gaussian(cls, sigma: Bandwidth = "auto") -> "KernelSpec":
        return cls(kind="gaussian", sigma=sigma)

    @classmethod
    def parse(cls, text: Union[str, "KernelSpec"]) -> "KernelSpec":
        """
        Parse the text form, e.g. ``linear``, ``polynomial:c=1,d=2``, ``gaussian:sigma=auto``.

        Args:
            text: Kernel description (an existing KernelSpec is passed through)

        Returns:
            KernelSpec
        """
        if isinstance(text, KernelSpec):
            return text
        name, _, params = str(text).strip().partition(":")
        kind = _ALIASES.get(name.strip().lower(), name.strip().lower())
        if kind not in KERNEL_KINDS:
            raise InputError(f"Unknown kernel '{name}', expected one of {list(KERNEL_KINDS)}")

        values = {}
        for item in filter(None, (p.strip() for p in params.split(","))):
            key, sep, raw = item.partition("=")
            key = key.strip()
            if not sep or key not in ("c", "d", "sigma"):
                raise InputError(f"Bad kernel parameter '{item}' in '{text}'")
            raw = raw.strip()
            try:
                if key == "d":
                    values[key] = int(raw)
                elif key == "sigma" and raw.lower() == "auto":
                    values[key] = "auto"
                else:
                    values[key] = float(raw)
            except ValueError as e:
                raise InputError(f"Bad kernel parameter '{item}' in '{text}'") from e
        try:
            return cls(kind=kind, **values)
        except ValueError as e:
            raise InputError(f"Invalid kernel '{text}': {e}") from e

    def resolve(self, X: np.ndarray) -> "KernelSpec":
        """Replace an automatic Gaussian bandwidth by the median pairwise distance of X."""
        if self.kind == "gaussian" and self.sigma == "auto":
            return self.model_copy(update={"sigma": median_pairwise_distance(X)})
        return self

    @property
    def is_resolved(self) -> bool:
        return self.kind != "gaussian" or self.sigma != "auto"

    def __str__(self) -> str:
        if self.kind == "polynomial":
            return f"polynomial:c={self.c:.17g},d={self.d}"
        if self.kind == "gaussian":
            sigma = self.sigma if self.sigma == "auto" else f"{self.sigma:.17g}"
            return f"gaussian:sigma={sigma}"
        return "linear"


def _require_resolved(spec: KernelSpec) -> None:
    if not spec.is_resolved:
        raise InputError("Gaussian bandwidth is 'auto'; call KernelSpec.resolve(X) first")


def kernel_eval(spec: KernelSpec, x: np.ndarray, y: np.ndarray) -> float:
    """
    Evaluate <phi(x), phi(y)> for a single pair of samples.

    Args:
        spec: Kernel specification
        x: First sample
        y: Second sample

    Returns:
        Kernel value
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size == 0 or x.shape != y.shape:
        raise InputError(f"Kernel arguments must share a dimension >= 1, got {x.size} and {y.size}")
    _require_resolved(spec)

    if spec.kind == "linear":
        return float(x @ y)
    if spec.kind == "polynomial":
        return float((x @ y + spec.c) ** spec.d)
    diff = x - y
    return float(np.exp(-(diff @ diff) / (2.0 * spec.sigma**2)))


def gram_matrix(spec: KernelSpec, X: np.ndarray) -> np.ndarray:
    """
    Gram matrix K(i, j) = <phi(x_i), phi(x_j)> over the columns of X.

    The result is symmetrized as (K + K^T) / 2.

    Args:
        spec: Kernel specification (a Gaussian 'auto' bandwidth is resolved against X)
        X: m x n data matrix, columns are samples

    Returns:
        n x n Gram matrix
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] < 1:
        raise InputError(f"gram_matrix needs an m x n matrix with n >= 1, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InputError("gram_matrix input contains non-finite entries")

    spec = spec.resolve(X)
    if spec.kind == "linear":
        K = X.T @ X
    elif spec.kind == "polynomial":
        K = (X.T @ X + spec.c) ** spec.d
    else:
        sq_dists = cdist(X.T, X.T, metric="sqeuclidean")
        K = np.exp(-sq_dists / (2.0 * spec.sigma**2))
    return (K + K.T) / 2.0
