"""Subspaces as orthonormal bases, their lattice operations and invariant closures.

Every subspace lives in C^n and is stored as an n×k matrix with orthonormal
columns; k = 0 (the zero subspace) is an ordinary value.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from multi_isometry.errors import DimensionError
from multi_isometry.numcore.predicates import rank_cutoff
from multi_isometry.util import (
    ComplexMatrix,
    Tolerances,
    dagger,
    fro,
    identity,
    require_square,
    resolve_tolerances,
    to_matrix,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Subspace:
    """Orthonormal-basis representation of a subspace of C^ambient_dim."""

    basis: ComplexMatrix

    def __post_init__(self) -> None:
        if self.basis.ndim != 2:
            raise DimensionError(f"basis must be 2-D. Got shape {self.basis.shape}.")
        if self.basis.shape[1] > self.basis.shape[0]:
            raise DimensionError(
                f"basis has {self.basis.shape[1]} columns in a {self.basis.shape[0]}-dim space"
            )

    # ---- constructors ----

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(np.zeros((ambient_dim, 0), dtype=np.complex128))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(identity(ambient_dim))

    @classmethod
    def coordinate(cls, ambient_dim: int, indices: list[int] | tuple[int, ...]) -> "Subspace":
        """Span of the standard basis vectors e_i, i in indices."""
        return cls(identity(ambient_dim)[:, list(indices)])

    # ---- properties ----

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> ComplexMatrix:
        return self.basis @ dagger(self.basis)

    def orthonormality_residual(self) -> float:
        return fro(dagger(self.basis) @ self.basis - identity(self.dim))

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


# ----------------------------
# Construction
# ----------------------------


def _fix_phases(Q: ComplexMatrix) -> ComplexMatrix:
    """Make the largest-modulus entry of each column real positive."""
    if Q.shape[1] == 0:
        return Q
    idx = np.argmax(np.abs(Q), axis=0)
    lead = Q[idx, np.arange(Q.shape[1])]
    mags = np.abs(lead)
    phases = np.ones_like(lead)
    nonzero = mags > 0
    phases[nonzero] = lead[nonzero] / mags[nonzero]
    return Q * np.conj(phases)[None, :]


def span(M: ComplexMatrix, tol: Tolerances | None = None) -> Subspace:
    """Orthonormal basis of the column span of M."""
    tol = resolve_tolerances(tol)
    M = to_matrix(M, name="span input") if not isinstance(M, np.ndarray) else M
    n = M.shape[0]
    if M.shape[1] == 0 or n == 0:
        return Subspace.zero(n)
    u, s, _ = sla.svd(M, full_matrices=False)
    r = int(np.sum(s > rank_cutoff(s, tol)))
    return Subspace(_fix_phases(u[:, :r]))


def kernel(M: ComplexMatrix, tol: Tolerances | None = None) -> Subspace:
    """Null space of M: right singular vectors with σ ≤ max(tol_eq, tol_rank·σ_max)."""
    tol = resolve_tolerances(tol)
    ncols = M.shape[1]
    if ncols == 0:
        return Subspace.zero(0)
    if M.shape[0] == 0:
        return Subspace.full(ncols)
    _, s, vh = sla.svd(M, full_matrices=True)
    cutoff = max(tol.tol_eq, tol.tol_rank * (float(s[0]) if s.size else 0.0))
    r = int(np.sum(s > cutoff))
    return Subspace(_fix_phases(dagger(vh[r:, :])))


# ----------------------------
# Lattice operations
# ----------------------------


def _check_ambient(A: Subspace, B: Subspace) -> None:
    if A.ambient_dim != B.ambient_dim:
        raise DimensionError(
            f"ambient dimensions differ: {A.ambient_dim} vs {B.ambient_dim}"
        )


def subspace_sum(A: Subspace, B: Subspace, tol: Tolerances | None = None) -> Subspace:
    _check_ambient(A, B)
    return span(np.hstack([A.basis, B.basis]), tol)


def subspace_complement(
    A: Subspace, within: Subspace | None = None, tol: Tolerances | None = None
) -> Subspace:
    """Orthocomplement of A in the ambient space, or within a given superspace."""
    n = A.ambient_dim
    if within is None:
        if A.dim == 0:
            return Subspace.full(n)
        if A.dim == n:
            return Subspace.zero(n)
        within = Subspace.full(n)
    _check_ambient(A, within)
    if A.dim == 0:
        return within
    residual = within.basis - A.basis @ (dagger(A.basis) @ within.basis)
    return span(residual, tol)


def subspace_intersect(A: Subspace, B: Subspace, tol: Tolerances | None = None) -> Subspace:
    """A ∩ B = (A⊥ + B⊥)⊥."""
    _check_ambient(A, B)
    return subspace_complement(
        subspace_sum(subspace_complement(A, tol=tol), subspace_complement(B, tol=tol), tol), tol=tol
    )


def distance_outside(A: Subspace, B: Subspace) -> np.ndarray:
    """Per-basis-vector norm of the component of A's basis outside B."""
    _check_ambient(A, B)
    if A.dim == 0:
        return np.zeros(0)
    residual = A.basis - B.basis @ (dagger(B.basis) @ A.basis)
    return np.linalg.norm(residual, axis=0)


def subspace_contains(A: Subspace, B: Subspace, tol: Tolerances | None = None) -> bool:
    """True iff A ⊆ B."""
    tol = resolve_tolerances(tol)
    d = distance_outside(A, B)
    return bool(d.size == 0 or float(d.max()) <= tol.tol_orth)


def subspaces_equal(A: Subspace, B: Subspace, tol: Tolerances | None = None) -> bool:
    return A.dim == B.dim and subspace_contains(A, B, tol) and subspace_contains(B, A, tol)


# ----------------------------
# Operators and subspaces
# ----------------------------


def compress(T: ComplexMatrix, S: Subspace) -> ComplexMatrix:
    """Matrix of P_S T|S in the basis of S."""
    return dagger(S.basis) @ T @ S.basis


def invariance_residual(T: ComplexMatrix, S: Subspace) -> float:
    """‖(I − P_S) T P_S‖_F; zero iff T·S ⊆ S."""
    if S.dim == 0:
        return 0.0
    image = T @ S.basis
    return fro(image - S.basis @ (dagger(S.basis) @ image))


def is_invariant(T: ComplexMatrix, S: Subspace, tol: Tolerances | None = None) -> bool:
    tol = resolve_tolerances(tol)
    return invariance_residual(T, S) <= tol.tol_eq


def invariant_closure(T: ComplexMatrix, seed: Subspace, tol: Tolerances | None = None) -> Subspace:
    """Smallest T-invariant subspace containing seed."""
    n = require_square(T, name="T")
    if seed.ambient_dim != n:
        raise DimensionError(f"seed lives in C^{seed.ambient_dim}, T acts on C^{n}")
    current = seed
    for _ in range(n + 1):
        grown = span(np.hstack([seed.basis, current.basis, T @ current.basis]), tol)
        if grown.dim == current.dim:
            return grown
        current = grown
    return current


def largest_invariant_inside(
    T: ComplexMatrix, container: Subspace, tol: Tolerances | None = None
) -> Subspace:
    """Largest T-invariant subspace of container: complement of closure(Tᴴ, container⊥)."""
    require_square(T, name="T")
    outside = subspace_complement(container, tol=tol)
    return subspace_complement(invariant_closure(dagger(T), outside, tol), tol=tol)


def krylov_span(
    T: ComplexMatrix, seed: ComplexMatrix, steps: int | None = None, tol: Tolerances | None = None
) -> Subspace:
    """span{X, TX, T²X, ...} built from explicit (column-normalized) powers."""
    tol = resolve_tolerances(tol)
    n = require_square(T, name="T")
    steps = n if steps is None else steps
    blocks = []
    Y = span(seed, tol).basis
    for _ in range(steps + 1):
        norms = np.linalg.norm(Y, axis=0)
        keep = norms > tol.tol_rank
        Y = Y[:, keep] / norms[keep]
        if Y.shape[1] == 0:
            break
        blocks.append(Y)
        Y = T @ Y
    if not blocks:
        return Subspace.zero(n)
    return span(np.hstack(blocks), tol)


__all__ = [
    "Subspace",
    "compress",
    "distance_outside",
    "invariance_residual",
    "invariant_closure",
    "is_invariant",
    "kernel",
    "krylov_span",
    "largest_invariant_inside",
    "span",
    "subspace_complement",
    "subspace_contains",
    "subspace_intersect",
    "subspace_sum",
    "subspaces_equal",
]
