"""Exception hierarchy.

Every class also derives from the closest builtin (ValueError / RuntimeError)
so callers that only know the builtins still catch them.
"""

from __future__ import annotations


class MultiIsometryError(Exception):
    """Base class for all package errors."""


class DimensionError(MultiIsometryError, ValueError):
    pass


class PreconditionError(MultiIsometryError, ValueError):
    pass


class CompositionError(PreconditionError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class HypothesisError(PreconditionError):
    """A hypothesis of the completion theorem failed."""

    def __init__(self, message: str, condition: str, residual: float):
        super().__init__(message)
        self.condition = condition
        self.residual = residual


class NotAContractionError(PreconditionError):
    pass


class ClassificationError(MultiIsometryError, ValueError):
    pass


class ConfigurationError(MultiIsometryError, ValueError):
    pass


class InstanceError(MultiIsometryError, ValueError):
    """Malformed instance file; `path` locates the offending JSON node."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class ExtractionError(MultiIsometryError, RuntimeError):
    pass


class InternalConsistencyError(MultiIsometryError, RuntimeError):
    pass


class ResolutionError(MultiIsometryError, RuntimeError):
    pass


class ConstructionError(MultiIsometryError, RuntimeError):
    def __init__(self, message: str, residuals: dict[str, float] | None = None):
        super().__init__(message)
        self.residuals = dict(residuals or {})


__all__ = [
    "ClassificationError",
    "CompositionError",
    "ConfigurationError",
    "ConstructionError",
    "DimensionError",
    "ExtractionError",
    "HypothesisError",
    "InstanceError",
    "InternalConsistencyError",
    "MultiIsometryError",
    "NotAContractionError",
    "PreconditionError",
    "ResolutionError",
]
