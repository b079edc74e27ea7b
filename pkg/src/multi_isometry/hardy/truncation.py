"""Block-Toeplitz truncations of multipliers to the window of polynomials of degree < N.

Coordinates: a polynomial f(z) = Σ_{k<N} f_k z^k with f_k ∈ C^m is the vector
(f_0, f_1, ..., f_{N−1}) of length mN; block k holds degree k.

Analytic multipliers never lower degrees, so truncation is multiplicative:
truncate(Θ)·truncate(Ω) = truncate(ΘΩ). Their adjoints never raise degrees, so
the conjugate transpose is the exact compression of the adjoint multiplier.
Only products where an analytic factor acts on the top block lose information.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from multi_isometry.errors import DimensionError
from multi_isometry.hardy.symbol import OperatorPolynomial, product_of
from multi_isometry.numcore import Subspace, kernel, subspace_intersect
from multi_isometry.util import (
    DEFAULT_TRUNCATION,
    ComplexMatrix,
    Tolerances,
    dagger,
    fro,
    identity,
    resolve_tolerances,
    to_matrix,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    block_size: int
    degree_count: int
    matrix: ComplexMatrix

    def __post_init__(self) -> None:
        size = self.block_size * self.degree_count
        if self.matrix.shape != (size, size):
            raise DimensionError(
                f"matrix must be {size}×{size} for m={self.block_size}, N={self.degree_count}; "
                f"got {self.matrix.shape}"
            )

    @property
    def size(self) -> int:
        return self.block_size * self.degree_count

    def block(self, i: int, j: int) -> ComplexMatrix:
        m = self.block_size
        return self.matrix[i * m:(i + 1) * m, j * m:(j + 1) * m]

    def __matmul__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        if (self.block_size, self.degree_count) != (other.block_size, other.degree_count):
            raise DimensionError("truncations live on different windows")
        return TruncatedOperator(self.block_size, self.degree_count, self.matrix @ other.matrix)

    def power(self, k: int) -> "TruncatedOperator":
        return TruncatedOperator(self.block_size, self.degree_count, np.linalg.matrix_power(self.matrix, k))

    def apply(self, coeffs: np.ndarray) -> np.ndarray:
        """Act on an (N, m) array of coefficients, returning (N, m)."""
        return (self.matrix @ to_window(coeffs, self.degree_count)).reshape(self.degree_count, self.block_size)

    def toeplitz_residual(self) -> float:
        """Deviation from block-Toeplitz structure (block (i,j) depends on i − j only)."""
        worst = 0.0
        for i in range(self.degree_count):
            for j in range(self.degree_count):
                ref = self.block(i - j, 0) if i >= j else self.block(0, j - i)
                worst = max(worst, fro(self.block(i, j) - ref))
        return worst


# ----------------------------
# Window helpers
# ----------------------------


def to_window(coeffs: np.ndarray, N: int) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    if coeffs.ndim != 2 or coeffs.shape[0] > N:
        raise DimensionError(f"expected at most {N} coefficient rows, got shape {coeffs.shape}")
    padded = np.zeros((N, coeffs.shape[1]), dtype=np.complex128)
    padded[: coeffs.shape[0]] = coeffs
    return padded.reshape(-1)


def constants(basis: ComplexMatrix, N: int) -> ComplexMatrix:
    """Embed vectors of C^m as constant functions in the window (degree-0 block)."""
    basis = to_matrix(basis)
    m = basis.shape[0]
    out = np.zeros((m * N, basis.shape[1]), dtype=np.complex128)
    out[:m] = basis
    return out


def spread(basis: ComplexMatrix, N: int) -> ComplexMatrix:
    """Basis of H²(F) ∩ window for F = span(basis): block-diagonal copies of basis."""
    return np.kron(identity(N), to_matrix(basis))


def exact_columns(op: TruncatedOperator, overflow: int = 1) -> ComplexMatrix:
    """Columns for input degrees < N − overflow (the exactness window)."""
    return op.matrix[:, : op.block_size * max(op.degree_count - overflow, 0)]


# ----------------------------
# Truncation / adjoint
# ----------------------------


def truncate(theta: OperatorPolynomial, N: int = DEFAULT_TRUNCATION) -> TruncatedOperator:
    """Lower-triangular block-Toeplitz matrix with block (i, j) = coeff[i − j]."""
    if N < 1:
        raise ValueError(f"N must be >= 1. Got {N}.")
    m = theta.block_size
    M = np.zeros((m * N, m * N), dtype=np.complex128)
    for k, C in enumerate(theta.coeffs):
        for j in range(N - k):
            i = j + k
            M[i * m:(i + 1) * m, j * m:(j + 1) * m] = C
    return TruncatedOperator(m, N, M)


def adjoint(op: TruncatedOperator) -> TruncatedOperator:
    return TruncatedOperator(op.block_size, op.degree_count, dagger(op.matrix))


def backward_formula(U_1: ComplexMatrix, P_1: ComplexMatrix, coeffs: np.ndarray) -> np.ndarray:
    """Coefficients of U₁P₁⊥(f(z) − f(0))/z + U₁P₁f(z).

    This is the adjoint of the second factor (U₁ᴴ, I − U₁P₁U₁ᴴ) of a model pair.
    """
    U_1, P_1 = to_matrix(U_1), to_matrix(P_1)
    f = np.asarray(coeffs, dtype=np.complex128)
    A = U_1 @ (identity(U_1.shape[0]) - P_1)
    B = U_1 @ P_1
    shifted = np.vstack([f[1:], np.zeros((1, f.shape[1]), dtype=np.complex128)])
    return shifted @ A.T + f @ B.T


# ----------------------------
# Kernels, unitary parts, commutators
# ----------------------------


def kernel_of_adjoint(
    theta: OperatorPolynomial,
    N: int = DEFAULT_TRUNCATION,
    tol: Tolerances | None = None,
    cutoff: float | None = None,
) -> Subspace:
    """ker Θ(S)* inside the window.

    With `cutoff` the near-kernel is returned: right singular vectors of the
    truncated adjoint with σ ≤ cutoff (used for Blaschke truncations, whose
    kernel vectors are not polynomials).
    """
    Lh = dagger(truncate(theta, N).matrix)
    if cutoff is None:
        return kernel(Lh, tol)
    _, s, vh = sla.svd(Lh)
    r = int(np.sum(s > cutoff))
    return Subspace(dagger(vh[r:, :]))


def unitary_part_truncated(
    symbols, N: int = DEFAULT_TRUNCATION, tol: Tolerances | None = None
) -> Subspace:
    """Window part of ⋂_k V^k H² for V the product of the symbols.

    x lies in the range of V^k iff ‖V*^k x‖ = ‖x‖, which the truncated adjoint
    computes exactly. The chain of these subspaces only shrinks and stays put
    once it stalls, so iteration stops there.
    """
    tol = resolve_tolerances(tol)
    L = truncate(product_of(symbols), N).matrix
    size = L.shape[0]
    current = Subspace.full(size)
    Lk = identity(size)
    for k in range(1, size + 1):
        Lk = L @ Lk
        in_range = kernel(identity(size) - Lk @ dagger(Lk), tol)
        shrunk = subspace_intersect(current, in_range, tol)
        logger.debug("unitary part window: k=%d dim=%d", k, shrunk.dim)
        if shrunk.dim == current.dim:
            return shrunk
        current = shrunk
    return current


def commutator_defect(U_1: ComplexMatrix, P_1: ComplexMatrix) -> ComplexMatrix:
    """U₁P₁U₁(I − P₁): the only nonzero block of V₂*V₁ − V₁V₂* (degree-0 input)."""
    U_1, P_1 = to_matrix(U_1), to_matrix(P_1)
    return U_1 @ P_1 @ U_1 @ (identity(U_1.shape[0]) - P_1)


def truncated_commutator(
    first: OperatorPolynomial, second: OperatorPolynomial, N: int = DEFAULT_TRUNCATION
) -> ComplexMatrix:
    """V₂*V₁ − V₁V₂* on input degrees < N − 1 (mN × m(N−1))."""
    L1 = truncate(first, N).matrix
    L2h = dagger(truncate(second, N).matrix)
    C = L2h @ L1 - L1 @ L2h
    return C[:, : first.block_size * (N - 1)]


__all__ = [
    "TruncatedOperator",
    "adjoint",
    "backward_formula",
    "commutator_defect",
    "constants",
    "exact_columns",
    "kernel_of_adjoint",
    "spread",
    "to_window",
    "truncate",
    "truncated_commutator",
    "unitary_part_truncated",
]
