"""Exception types shared across the package."""

from __future__ import annotations


class StrongThermError(Exception):
    """Base class for all package errors."""


class DimensionError(StrongThermError, ValueError):
    """Operator shapes and subsystem splits do not agree."""


class EigenDecompositionError(StrongThermError, RuntimeError):
    """LAPACK failed to converge or the input contained non-finite entries."""


class NotPositiveDefiniteError(StrongThermError, ValueError):
    """A logarithm or inverse was requested of a matrix that is not positive definite."""

    def __init__(self, message: str, min_eigenvalue: float):
        super().__init__(f"{message} (minimum eigenvalue {min_eigenvalue:.3e})")
        self.min_eigenvalue = min_eigenvalue


class SingularOperatorError(StrongThermError, ValueError):
    def __init__(self, message: str, condition_number: float):
        super().__init__(f"{message} (condition number {condition_number:.3e})")
        self.condition_number = condition_number


class DerivativeError(StrongThermError, ArithmeticError):
    """A finite-difference stencil produced a non-finite value."""

    def __init__(self, point: float):
        super().__init__(f"non-finite function value at stencil point {point!r}")
        self.point = point


class QuadratureError(StrongThermError, ArithmeticError):
    """Gauss-Hermite result changed by more than the tolerance under order doubling."""


class ModelError(StrongThermError, ValueError):
    """Invalid model specification."""


class TruncationError(StrongThermError, RuntimeError):
    def __init__(self, message: str, trace: list):
        super().__init__(message)
        self.trace = trace


class ConfigError(StrongThermError, ValueError):
    """Bad run configuration; ``key`` names the offending entry."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = []
        if key:
            where.append(f"key `{key}`")
        if line:
            where.append(f"line {line}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)
        self.key = key
        self.line = line
