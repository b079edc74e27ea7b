"""Utility helpers for matrix coercion, norms and numerical tolerances.

Design goal:
- numpy/scipy do the numerical work.
- Public-facing helpers accept plain Python inputs (nested lists, tuples, scalars)
  and return `numpy.ndarray` values of dtype complex128.
"""

from __future__ import annotations

import dataclasses
import logging
import os
from dataclasses import dataclass
from typing import Any

import numpy as np

from multi_isometry.errors import ConfigurationError, DimensionError

logger = logging.getLogger(__name__)

ComplexMatrix = np.ndarray

TOLERANCE_ENV_VAR = "MULTIISO_TOL"
DEFAULT_TRUNCATION = 8
DEFAULT_SEED = 0


# ----------------------------
# Matrices
# ----------------------------


def to_matrix(value: Any, *, name: str = "matrix") -> ComplexMatrix:
    """Convert common matrix inputs to a 2-D complex `numpy.ndarray`.

    Accepts:
      - numpy arrays (any numeric dtype)
      - nested lists / tuples of numbers
      - scalars (returned as a 1×1 matrix)

    Returns:
      - a fresh complex128 array with finite entries
    """
    if value is None:
        raise TypeError(f"{name} is required")

    try:
        arr = np.array(value, dtype=np.complex128)
    except (TypeError, ValueError) as e:
        raise TypeError(f"{name} must be a rectangular numeric array. Got {type(value).__name__}.") from e

    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D. Got shape {arr.shape}.")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return arr


def require_square(M: ComplexMatrix, *, name: str = "matrix") -> int:
    """Return the size of a square matrix, raising DimensionError otherwise."""
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square. Got shape {M.shape}.")
    return M.shape[0]


def require_same_shape(*mats: ComplexMatrix, names: tuple[str, ...] | None = None) -> None:
    shapes = {m.shape for m in mats}
    if len(shapes) > 1:
        label = ", ".join(names) if names else "inputs"
        raise DimensionError(f"{label} must share one shape. Got {sorted(shapes)}.")


def dagger(M: ComplexMatrix) -> ComplexMatrix:
    return M.conj().T


def fro(M: ComplexMatrix) -> float:
    """Frobenius norm; 0.0 for empty matrices."""
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, "fro"))


def op_norm(M: ComplexMatrix) -> float:
    """Spectral norm; 0.0 for empty matrices."""
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def identity(n: int) -> ComplexMatrix:
    return np.eye(n, dtype=np.complex128)


# ----------------------------
# Tolerances
# ----------------------------


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by every operation.

    tol_orth : unitarity / projection / orthonormality residual
    tol_rank : relative singular-value cutoff for rank decisions
    tol_eq   : matrix equality residual
    tol_spec : spectral-radius margin for the C_{.0} test
    """

    tol_orth: float = 1e-9
    tol_rank: float = 1e-10
    tol_eq: float = 1e-9
    tol_spec: float = 1e-9

    def __post_init__(self) -> None:
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if not value > 0:
                raise ValueError(f"{field.name} must be strictly positive. Got {value!r}.")
        if self.tol_rank < np.finfo(float).eps:
            raise ValueError(f"tol_rank must be >= machine epsilon. Got {self.tol_rank!r}.")

    @classmethod
    def default(cls) -> "Tolerances":
        """Defaults, with tol_eq overridden by the MULTIISO_TOL environment variable."""
        raw = os.environ.get(TOLERANCE_ENV_VAR)
        if raw is None or raw.strip() == "":
            return cls()
        try:
            tol_eq = float(raw)
        except ValueError as e:
            raise ConfigurationError(f"{TOLERANCE_ENV_VAR} must be a float. Got {raw!r}.") from e
        logger.debug("tol_eq overridden from %s: %g", TOLERANCE_ENV_VAR, tol_eq)
        try:
            return cls(tol_eq=tol_eq)
        except ValueError as e:
            raise ConfigurationError(f"{TOLERANCE_ENV_VAR}: {e}") from e

    def replace(self, **changes: float | None) -> "Tolerances":
        """Copy with the given (non-None) fields replaced."""
        kept = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **kept)

    def looser(self, other: "Tolerances") -> "Tolerances":
        """Field-wise maximum; used when two inputs carry their own tolerances."""
        mine, theirs = self.as_dict(), other.as_dict()
        return Tolerances(**{k: max(v, theirs[k]) for k, v in mine.items()})

    def as_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)


def resolve_tolerances(tol: Tolerances | None) -> Tolerances:
    return Tolerances.default() if tol is None else tol


def make_rng(seed: int | np.random.Generator | None = DEFAULT_SEED) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(DEFAULT_SEED if seed is None else seed)


__all__ = [
    "ComplexMatrix",
    "DEFAULT_SEED",
    "DEFAULT_TRUNCATION",
    "TOLERANCE_ENV_VAR",
    "Tolerances",
    "dagger",
    "fro",
    "identity",
    "make_rng",
    "op_norm",
    "require_same_shape",
    "require_square",
    "resolve_tolerances",
    "to_matrix",
]
