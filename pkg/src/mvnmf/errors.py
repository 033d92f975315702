"""
Error hierarchy shared by every module.

Each error carries a category that the CLI turns into an exit status.
"""


class MvnmfError(Exception):
    """Base class for all library errors."""

    category = "internal"


class InputError(MvnmfError):
    """Invalid data, shapes, parameters or configuration."""

    category = "input"


class UnsupportedOperationError(InputError):
    """Operation is well-formed but not defined for the given setup."""


class SolverError(MvnmfError):
    """Numerical failure during optimization."""

    category = "solver"


class StorageError(MvnmfError):
    """Reading or writing artifacts failed."""

    category = "io"


EXIT_CODES = {
    "input": 2,
    "solver": 3,
    "io": 4,
}


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the process exit status."""
    if isinstance(error, MvnmfError):
        return EXIT_CODES.get(error.category, 1)
    return 1
