"""Exception hierarchy shared by every module."""

from __future__ import annotations


class SparseHWError(Exception):
    """Base class for all library errors."""


class DimensionError(SparseHWError, ValueError):
    """Array shapes that should agree do not."""


class DomainError(SparseHWError, ValueError):
    """An argument lies outside the range where the formula is defined."""


class StructureError(SparseHWError, ValueError):
    """A matrix does not have the structure a bound variant requires."""


class ConvergenceError(SparseHWError, RuntimeError):
    """An iterative method hit its iteration cap.

    The last iterate is kept so callers can inspect or accept it.
    """

    def __init__(self, message: str, estimate: float, vector, iterations: int):
        super().__init__(message)
        self.estimate = estimate
        self.vector = vector
        self.iterations = iterations


class FeasibilityError(SparseHWError, ValueError):
    """Moment specifications that no distribution can realise."""

    def __init__(self, message: str, cell: tuple[int, int] | None = None):
        super().__init__(message)
        self.cell = cell


class NotPSDError(SparseHWError, ValueError):
    """A covariance matrix failed positive semidefinite validation."""

    def __init__(self, message: str, order: int):
        super().__init__(message)
        self.order = order


class DegenerateConditionError(SparseHWError, ValueError):
    """A sample-size condition is undefined for the given inputs."""


class PreconditionError(SparseHWError, ValueError):
    """An argument violates the hypothesis under which a check is valid."""


class ConfigError(SparseHWError):
    """Invalid experiment configuration."""

    def __init__(self, key: str, value, constraint: str, line: int | None = None):
        self.key = key
        self.value = value
        self.constraint = constraint
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}'{key}' = {value!r}: {constraint}")
