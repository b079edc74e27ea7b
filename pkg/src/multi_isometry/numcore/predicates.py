"""Matrix predicates with explicit residuals."""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from multi_isometry.util import (
    ComplexMatrix,
    Tolerances,
    dagger,
    fro,
    identity,
    require_square,
    resolve_tolerances,
)


def unitary_residual(M: ComplexMatrix) -> float:
    """max(‖MᴴM − I‖_F, ‖MMᴴ − I‖_F)."""
    n = require_square(M)
    eye = identity(n)
    return max(fro(dagger(M) @ M - eye), fro(M @ dagger(M) - eye))


def projection_residual(M: ComplexMatrix) -> float:
    """max(‖M² − M‖_F, ‖Mᴴ − M‖_F)."""
    require_square(M)
    return max(fro(M @ M - M), fro(dagger(M) - M))


def is_unitary(M: ComplexMatrix, tol: Tolerances | None = None) -> bool:
    tol = resolve_tolerances(tol)
    return unitary_residual(M) <= tol.tol_orth


def is_projection(M: ComplexMatrix, tol: Tolerances | None = None) -> bool:
    tol = resolve_tolerances(tol)
    return projection_residual(M) <= tol.tol_orth


def is_isometry(M: ComplexMatrix, tol: Tolerances | None = None) -> bool:
    """Columns orthonormal (M may be rectangular)."""
    tol = resolve_tolerances(tol)
    return fro(dagger(M) @ M - identity(M.shape[1])) <= tol.tol_orth


def min_eigenvalue(H: ComplexMatrix) -> float:
    """Smallest eigenvalue of the Hermitian part of H (inf for empty input)."""
    n = require_square(H)
    if n == 0:
        return float("inf")
    return float(sla.eigvalsh(0.5 * (H + dagger(H)))[0])


def loewner_leq(A: ComplexMatrix, B: ComplexMatrix, tol: Tolerances | None = None) -> bool:
    """A ≤ B in the operator order, i.e. B − A is positive semidefinite."""
    tol = resolve_tolerances(tol)
    return min_eigenvalue(B - A) >= -tol.tol_eq


def spectral_radius(M: ComplexMatrix) -> float:
    n = require_square(M)
    if n == 0:
        return 0.0
    return float(np.max(np.abs(sla.eigvals(M))))


def rank(M: ComplexMatrix, tol: Tolerances | None = None) -> int:
    """Numerical rank with the relative cutoff tol_rank·σ_max (absolute below 1e-14)."""
    tol = resolve_tolerances(tol)
    if M.size == 0:
        return 0
    s = sla.svdvals(M)
    return int(np.sum(s > rank_cutoff(s, tol)))


def rank_cutoff(singular_values: np.ndarray, tol: Tolerances) -> float:
    smax = float(singular_values[0]) if singular_values.size else 0.0
    if smax < 1e-14:
        return tol.tol_rank
    return tol.tol_rank * smax


__all__ = [
    "is_isometry",
    "is_projection",
    "is_unitary",
    "loewner_leq",
    "min_eigenvalue",
    "projection_residual",
    "rank",
    "rank_cutoff",
    "spectral_radius",
    "unitary_residual",
]
