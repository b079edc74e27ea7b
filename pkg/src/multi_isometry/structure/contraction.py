"""Contractions: defect operators, the Julia–Halmos unitary, the unitary/cnu splitting."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from multi_isometry.errors import InternalConsistencyError, NotAContractionError
from multi_isometry.numcore import (
    Subspace,
    compress,
    kernel,
    spectral_radius,
    subspace_complement,
    subspace_intersect,
    unitary_residual,
)
from multi_isometry.util import (
    ComplexMatrix,
    Tolerances,
    dagger,
    fro,
    identity,
    op_norm,
    require_square,
    resolve_tolerances,
    to_matrix,
)

logger = logging.getLogger(__name__)


def _defect_root(H: ComplexMatrix, tol: Tolerances) -> tuple[ComplexMatrix, Subspace]:
    """Square root of the PSD operand I − XᴴX and the closure of its range.

    Eigenvalues at or below tol_eq are treated as zero so that the root and the
    range basis describe the same subspace.
    """
    n = H.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=np.complex128), Subspace.zero(0)
    w, V = sla.eigh(0.5 * (H + dagger(H)))
    kept = w > tol.tol_eq
    root = (V[:, kept] * np.sqrt(w[kept])) @ dagger(V[:, kept])
    if kept.all():
        return root, Subspace.full(n)
    return root, Subspace(V[:, kept])


@dataclass(frozen=True, eq=False)
class ContractionData:
    """T with its defect operators and defect spaces (bases in the coordinates of T)."""

    T: ComplexMatrix
    D_T: ComplexMatrix
    D_T_star: ComplexMatrix
    defect_space: Subspace
    defect_space_star: Subspace

    @property
    def dim(self) -> int:
        return self.T.shape[0]

    @property
    def defect_dims(self) -> tuple[int, int]:
        return self.defect_space.dim, self.defect_space_star.dim

    def defect_residual(self) -> float:
        """‖D_T² − (I − TᴴT)‖_F."""
        return fro(self.D_T @ self.D_T - (identity(self.dim) - dagger(self.T) @ self.T))


def defect(T: ComplexMatrix, tol: Tolerances | None = None) -> ContractionData:
    tol = resolve_tolerances(tol)
    T = to_matrix(T, name="T")
    n = require_square(T, name="T")
    norm = op_norm(T)
    if norm > 1 + tol.tol_eq:
        raise NotAContractionError(f"‖T‖ = {norm:.12g} exceeds 1 + tol_eq")
    eye = identity(n)
    D, space = _defect_root(eye - dagger(T) @ T, tol)
    D_star, space_star = _defect_root(eye - T @ dagger(T), tol)
    logger.debug("defect: dim %d, defect dims (%d, %d)", n, space.dim, space_star.dim)
    return ContractionData(T, D, D_star, space, space_star)


def julia_halmos(T: ComplexMatrix, tol: Tolerances | None = None) -> ComplexMatrix:
    """[[T, D_T*],[D_T, −Tᴴ]] from F ⊕ D_T* onto F ⊕ D_T, in defect-space coordinates."""
    tol = resolve_tolerances(tol)
    data = defect(T, tol)
    return julia_halmos_of(data, tol)


def julia_halmos_of(data: ContractionData, tol: Tolerances | None = None) -> ComplexMatrix:
    tol = resolve_tolerances(tol)
    T = data.T
    Dd, Dds = data.defect_space.basis, data.defect_space_star.basis
    J = np.block(
        [
            [T, data.D_T_star @ Dds],
            [dagger(Dd) @ data.D_T, -dagger(Dd) @ dagger(T) @ Dds],
        ]
    )
    r = unitary_residual(J)
    if r > tol.tol_orth:
        raise InternalConsistencyError(f"Julia–Halmos matrix is not unitary (residual {r:.3e})")
    return J


# ----------------------------
# Unitary / completely nonunitary parts
# ----------------------------


@dataclass(frozen=True, eq=False)
class ContractionParts:
    T_u: ComplexMatrix
    T_cnu: ComplexMatrix
    unitary_space: Subspace
    cnu_space: Subspace

    def reducing_residual(self, T: ComplexMatrix) -> float:
        """Size of the cross blocks of T in the splitting."""
        if self.unitary_space.dim == 0 or self.cnu_space.dim == 0:
            return 0.0
        Bu, Bc = self.unitary_space.basis, self.cnu_space.basis
        return max(fro(dagger(Bc) @ T @ Bu), fro(dagger(Bu) @ T @ Bc))


def contraction_parts(T: ComplexMatrix, tol: Tolerances | None = None) -> ContractionParts:
    """F_u = ⋂_k ker(I − T^kᴴT^k) ∩ ker(I − T^kT^kᴴ), k = 1..dim."""
    tol = resolve_tolerances(tol)
    T = to_matrix(T, name="T")
    n = require_square(T, name="T")
    defect(T, tol)
    eye = identity(n)
    current = Subspace.full(n)
    Tk = eye
    for _ in range(n):
        Tk = T @ Tk
        current = subspace_intersect(current, kernel(eye - dagger(Tk) @ Tk, tol), tol)
        current = subspace_intersect(current, kernel(eye - Tk @ dagger(Tk), tol), tol)
        if current.dim == 0:
            break
    cnu = subspace_complement(current, tol=tol)
    T_u, T_cnu = compress(T, current), compress(T, cnu)
    r = unitary_residual(T_u)
    if r > tol.tol_orth:
        raise InternalConsistencyError(f"unitary part is not unitary (residual {r:.3e})")
    parts = ContractionParts(T_u, T_cnu, current, cnu)
    r = parts.reducing_residual(T)
    if r > tol.tol_eq:
        raise InternalConsistencyError(f"unitary part does not reduce T (residual {r:.3e})")
    logger.debug("contraction parts: unitary %d, cnu %d", current.dim, cnu.dim)
    return parts


def is_c_dot_zero(T: ComplexMatrix, tol: Tolerances | None = None) -> bool:
    """Tᴴⁿ → 0, which in finite dimensions means spectral radius < 1."""
    tol = resolve_tolerances(tol)
    T = to_matrix(T, name="T")
    if T.shape[0] == 0:
        return True
    return spectral_radius(T) < 1 - tol.tol_spec


__all__ = [
    "ContractionData",
    "ContractionParts",
    "contraction_parts",
    "defect",
    "is_c_dot_zero",
    "julia_halmos",
    "julia_halmos_of",
]
