"""
Multi-view dataset container, CSV ingestion and per-feature scaling.

View files hold one row per feature and one column per sample (the m x n convention),
comma-separated with '.' decimals and an optional header row. Label files hold one
integer per line.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from mvnmf.errors import InputError, StorageError
from mvnmf.utils.logger import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]

FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True, eq=False)
class View:
    """One data modality: an m x n matrix with a name."""

    name: str
    X: np.ndarray

    @property
    def m(self) -> int:
        return self.X.shape[0]


@dataclass(frozen=True, eq=False)
class MultiViewDataset:
    """
    v feature matrices over the same n samples plus optional ground-truth labels.

    Construction validates that every view has n columns, all entries are finite and the
    labels (when present) are contiguous ids starting at 0.
    """

    views: List[View]
    labels: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        if not self.views:
            raise InputError("A dataset needs at least one view")

        n = self.views[0].X.shape[1]
        for view in self.views:
            if view.X.ndim != 2:
                raise InputError(f"View '{view.name}' is not a matrix (shape {view.X.shape})")
            if view.X.shape[1] != n:
                raise InputError(
                    f"Sample-count mismatch: view '{self.views[0].name}' has {n} columns, "
                    f"view '{view.name}' has {view.X.shape[1]}"
                )
            if not np.all(np.isfinite(view.X)):
                row, col = np.argwhere(~np.isfinite(view.X))[0]
                raise InputError(
                    f"View '{view.name}' has a non-finite value at row {row + 1}, column {col + 1}"
                )

        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (n,):
                raise InputError(f"Labels have shape {labels.shape}, expected ({n},)")
            unique = np.unique(labels)
            if not np.array_equal(unique, np.arange(unique.size)):
                raise InputError(
                    f"Labels must be contiguous ids starting at 0, got {unique.tolist()}"
                )

    @property
    def n(self) -> int:
        return self.views[0].X.shape[1]

    @property
    def v(self) -> int:
        return len(self.views)

    @property
    def names(self) -> List[str]:
        return [view.name for view in self.views]

    @property
    def matrices(self) -> List[np.ndarray]:
        return [view.X for view in self.views]

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    @property
    def is_nonnegative(self) -> bool:
        return all(np.all(view.X >= 0) for view in self.views)

    def subset(self, view_indices: Sequence[int]) -> "MultiViewDataset":
        """Dataset restricted to the given views (same samples and labels)."""
        return MultiViewDataset(views=[self.views[i] for i in view_indices], labels=self.labels)

    def __repr__(self) -> str:
        dims = ", ".join(f"{v.name}:{v.m}" for v in self.views)
        return f"MultiViewDataset(n={self.n}, views=[{dims}], labels={self.has_labels})"


def _parse_cell(text: str) -> Optional[float]:
    try:
        return float(text)
    except ValueError:
        return None


def _read_view(path: Path) -> np.ndarray:
    """Parse one view file, reporting the file, line and column of any bad cell."""
    if not path.exists():
        raise StorageError(f"View file not found: {path}")
    try:
        raw = pd.read_csv(
            path,
            header=None,
            dtype=str,
            keep_default_na=False,
            encoding="utf-8",
            skip_blank_lines=True,
        )
    except pd.errors.EmptyDataError as e:
        raise InputError(f"{path}: file is empty") from e
    except pd.errors.ParserError as e:
        raise InputError(f"{path}: {e}") from e

    header_rows = 0
    if raw.shape[0] > 0 and _parse_cell(raw.iat[0, 0].strip()) is None:
        raw = raw.iloc[1:]
        header_rows = 1
    if raw.shape[0] == 0:
        raise InputError(f"{path}: no data rows")

    cells = raw.apply(lambda col: col.str.strip())
    parsed = np.vectorize(_parse_cell, otypes=[object])(cells.to_numpy(dtype=str))
    unparsed = np.vectorize(lambda value: value is None, otypes=[bool])(parsed)
    numeric = np.where(unparsed, 0.0, parsed).astype(float)

    if unparsed.any():
        row, col = np.argwhere(unparsed)[0]
        raise InputError(
            f"{path}: cannot parse '{cells.iat[row, col]}' as a number "
            f"(line {row + 1 + header_rows}, column {col + 1})"
        )
    if not np.all(np.isfinite(numeric)):
        row, col = np.argwhere(~np.isfinite(numeric))[0]
        raise InputError(
            f"{path}: non-finite value '{cells.iat[row, col]}' "
            f"(line {row + 1 + header_rows}, column {col + 1})"
        )
    return numeric


def _read_labels(path: Path) -> np.ndarray:
    if not path.exists():
        raise StorageError(f"Label file not found: {path}")
    labels = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            text = line.strip()
            if not text:
                continue
            try:
                labels.append(int(text))
            except ValueError as e:
                raise InputError(f"{path}: line {lineno}: '{text}' is not an integer label") from e
    return np.asarray(labels, dtype=np.int64)


def load_dataset(
    view_paths: Sequence[PathLike],
    labels_path: Optional[PathLike] = None,
    names: Optional[Sequence[str]] = None,
) -> MultiViewDataset:
    """
    Load a multi-view dataset from CSV files.

    Args:
        view_paths: One CSV per view (features as rows, samples as columns)
        labels_path: Optional file with one integer label per line
        names: Optional view names (defaults to file stems)

    Returns:
        Validated MultiViewDataset
    """
    paths = [Path(p) for p in view_paths]
    if not paths:
        raise InputError("At least one view file is required")
    if names is not None and len(names) != len(paths):
        raise InputError(f"Got {len(names)} view names for {len(paths)} view files")

    views = []
    for i, path in enumerate(paths):
        X = _read_view(path)
        name = names[i] if names is not None else path.stem
        logger.debug(f"Loaded view '{name}' from {path}: {X.shape[0]} features x {X.shape[1]} samples")
        views.append(View(name=name, X=X))

    labels = _read_labels(Path(labels_path)) if labels_path is not None else None
    dataset = MultiViewDataset(views=views, labels=labels)
    logger.info(f"Loaded {dataset!r}")
    return dataset


def write_dataset(dataset: MultiViewDataset, directory: PathLike) -> List[Path]:
    """
    Write a dataset in the ingestion format (17 significant digits, LF newlines).

    Files are ``view_<name>.csv`` per view and ``labels.csv`` when labels exist.

    Returns:
        Paths written, views first
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for view in dataset.views:
        path = directory / f"view_{view.name}.csv"
        pd.DataFrame(view.X).to_csv(
            path, header=False, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
        )
        written.append(path)
    if dataset.labels is not None:
        path = directory / "labels.csv"
        path.write_text("".join(f"{int(label)}\n" for label in dataset.labels), encoding="utf-8")
        written.append(path)
    logger.info(f"Wrote {dataset!r} to {directory}")
    return written


def minmax_scale(dataset: MultiViewDataset) -> MultiViewDataset:
    """
    Map every feature row to [0, 1] by (x - min) / (max - min).

    Constant rows map to 0. The input dataset is left untouched.
    """
    scaled = []
    for view in dataset.views:
        low = view.X.min(axis=1, keepdims=True)
        span = view.X.max(axis=1, keepdims=True) - low
        safe_span = np.where(span > 0, span, 1.0)
        X = np.where(span > 0, (view.X - low) / safe_span, 0.0)
        scaled.append(View(name=view.name, X=np.clip(X, 0.0, 1.0)))
    return MultiViewDataset(views=scaled, labels=dataset.labels)
