"""
Artifact persistence for experiment runs.

Every file is written to a temporary sibling first and moved into place with
``os.replace``, so readers never observe a half-written artifact.
"""

import os
import tempfile
from pathlib import Path
from typing import Iterable, List, Optional, Union

import pandas as pd

from mvnmf.config.settings import get_settings
from mvnmf.errors import StorageError
from mvnmf.utils.logger import get_logger

logger = get_logger(__name__)

FLOAT_FORMAT = "%.10g"


class ArtifactStore:
    """Owns one output directory and writes its artifacts atomically."""

    def __init__(self, root: Optional[Union[str, Path]] = None):
        settings = get_settings()
        self.root = Path(root) if root is not None else settings.output_dir
        try:
            if root is None:
                settings.ensure_directories()
            else:
                self.root.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise StorageError(f"Cannot create output directory {self.root}: {e}") from e

    def path(self, name: str) -> Path:
        return self.root / name

    def write_text(self, name: str, content: str) -> Path:
        """
        Atomically write a UTF-8 text artifact with LF line endings.

        Args:
            name: File name relative to the store root
            content: Full file content

        Returns:
            Path to the written file
        """
        target = self.path(name)
        tmp_name = None
        try:
            with tempfile.NamedTemporaryFile(
                "w", encoding="utf-8", newline="\n", dir=self.root,
                prefix=f".{name}.", suffix=".tmp", delete=False,
            ) as f:
                tmp_name = f.name
                f.write(content)
            os.replace(tmp_name, target)
        except OSError as e:
            if tmp_name is not None and os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise StorageError(f"Failed to write {target}: {e}") from e

        logger.debug(f"Wrote {target}")
        return target

    def write_table(
        self,
        name: str,
        table: pd.DataFrame,
        comments: Iterable[str] = (),
        float_format: str = FLOAT_FORMAT,
    ) -> Path:
        """
        Write a CSV table with a header row, preceded by optional ``# `` comment lines.

        Args:
            name: File name relative to the store root
            table: Data to write (the index is not written)
            comments: Provenance lines, written before the header
            float_format: printf-style format for float columns

        Returns:
            Path to the written file
        """
        header = "".join(f"# {line}\n" for line in comments)
        body = table.to_csv(index=False, float_format=float_format, lineterminator="\n")
        path = self.write_text(name, header + body)
        logger.info(f"Saved {len(table)} row(s) to {path}")
        return path

    def read_table(self, name: str) -> pd.DataFrame:
        """Load a table written by :meth:`write_table`, skipping comment lines."""
        return read_table(self.path(name))


def read_table(path: Union[str, Path]) -> pd.DataFrame:
    """
    Read an artifact CSV, skipping ``#`` comment lines.

    Raises:
        StorageError: If the file is missing or cannot be parsed
    """
    path = Path(path)
    if not path.exists():
        raise StorageError(f"Artifact not found: {path}")
    try:
        return pd.read_csv(path, comment="#")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, OSError) as e:
        raise StorageError(f"Cannot read {path}: {e}") from e


def read_comments(path: Union[str, Path]) -> List[str]:
    """The leading ``# `` comment lines of an artifact, without the marker."""
    comments = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.startswith("#"):
                break
            comments.append(line[1:].strip())
    return comments
