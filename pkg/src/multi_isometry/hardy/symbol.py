"""Operator-polynomial symbols Θ(z) = Σ A_k z^k acting as multipliers on H²(E).

A model factor V_{U,P} is the degree-1 symbol U(zP + P⊥) = U P⊥ + z U P.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import reduce

import numpy as np

from multi_isometry.errors import DimensionError, PreconditionError
from multi_isometry.numcore import projection_residual, unitary_residual
from multi_isometry.util import (
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
class OperatorPolynomial:
    """Θ(z) = coeffs[0] + z coeffs[1] + z² coeffs[2] + ..."""

    coeffs: tuple[ComplexMatrix, ...]

    def __post_init__(self) -> None:
        if len(self.coeffs) == 0:
            raise DimensionError("an operator polynomial needs at least one coefficient")
        shape = self.coeffs[0].shape
        if len(shape) != 2 or shape[0] != shape[1]:
            raise DimensionError(f"coefficients must be square. Got {shape}.")
        for k, C in enumerate(self.coeffs):
            if C.shape != shape:
                raise DimensionError(f"coefficient {k} has shape {C.shape}, expected {shape}")

    @classmethod
    def scalar(cls, coefficients, block_size: int = 1) -> "OperatorPolynomial":
        """Scalar polynomial Σ c_k z^k times the identity of size block_size."""
        eye = identity(block_size)
        return cls(tuple(complex(c) * eye for c in coefficients))

    @classmethod
    def monomial(cls, degree: int, block_size: int) -> "OperatorPolynomial":
        """z^degree · I."""
        zero = np.zeros((block_size, block_size), dtype=np.complex128)
        return cls(tuple([zero] * degree + [identity(block_size)]))

    @property
    def block_size(self) -> int:
        return self.coeffs[0].shape[0]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z: complex) -> ComplexMatrix:
        return sum((C * z**k for k, C in enumerate(self.coeffs)), np.zeros_like(self.coeffs[0]))

    def __matmul__(self, other: "OperatorPolynomial") -> "OperatorPolynomial":
        return symbol_product(self, other)

    def is_shift(self, tol: Tolerances | None = None) -> bool:
        """Θ(z) = zI (trailing zero coefficients allowed)."""
        tol = resolve_tolerances(tol)
        target = OperatorPolynomial.monomial(1, self.block_size).coeffs
        width = max(len(target), len(self.coeffs))
        mine = _padded(self.coeffs, width)
        theirs = _padded(target, width)
        return all(fro(a - b) <= tol.tol_eq for a, b in zip(mine, theirs))

    def circle_isometry_residual(self, samples: int = 16) -> float:
        """max over sample points on |z| = 1 of ‖Θ(z)ᴴΘ(z) − I‖_F."""
        eye = identity(self.block_size)
        zs = np.exp(2j * np.pi * np.arange(samples) / samples)
        return max(fro(dagger(self(z)) @ self(z) - eye) for z in zs)


@dataclass(frozen=True, eq=False)
class LinearSymbol(OperatorPolynomial):
    """Θ(z) = A + zB."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if len(self.coeffs) != 2:
            raise DimensionError(f"a linear symbol has two coefficients, got {len(self.coeffs)}")

    @classmethod
    def from_coefficients(cls, A: ComplexMatrix, B: ComplexMatrix) -> "LinearSymbol":
        return cls((to_matrix(A, name="A"), to_matrix(B, name="B")))

    @property
    def A(self) -> ComplexMatrix:
        return self.coeffs[0]

    @property
    def B(self) -> ComplexMatrix:
        return self.coeffs[1]

    def coefficient_law_residual(self) -> float:
        """Θ is isometric on the circle iff AᴴA + BᴴB = I and AᴴB = 0."""
        A, B = self.A, self.B
        return max(fro(dagger(A) @ A + dagger(B) @ B - identity(self.block_size)), fro(dagger(A) @ B))


def _padded(coeffs, width: int) -> list[ComplexMatrix]:
    zero = np.zeros_like(coeffs[0])
    return list(coeffs) + [zero] * (width - len(coeffs))


# ---- constructors ----


def symbol_of_model(U: ComplexMatrix, P: ComplexMatrix, tol: Tolerances | None = None) -> LinearSymbol:
    """V_{U,P} = U(zP + P⊥): A = U(I − P), B = UP."""
    tol = resolve_tolerances(tol)
    U, P = to_matrix(U, name="U"), to_matrix(P, name="P")
    if U.shape != P.shape:
        raise DimensionError(f"U and P must share one shape. Got {U.shape} and {P.shape}.")
    r = unitary_residual(U)
    if r > tol.tol_orth:
        raise PreconditionError(f"U is not unitary (residual {r:.3e})")
    r = projection_residual(P)
    if r > tol.tol_orth:
        raise PreconditionError(f"P is not an orthogonal projection (residual {r:.3e})")
    eye = identity(U.shape[0])
    return LinearSymbol((U @ (eye - P), U @ P))


def symbol_product(theta: OperatorPolynomial, omega: OperatorPolynomial) -> OperatorPolynomial:
    """Coefficient convolution of Θ(z)Ω(z)."""
    if theta.block_size != omega.block_size:
        raise DimensionError(f"block sizes differ: {theta.block_size} vs {omega.block_size}")
    out = [np.zeros_like(theta.coeffs[0]) for _ in range(theta.degree + omega.degree + 1)]
    for i, A in enumerate(theta.coeffs):
        for j, B in enumerate(omega.coeffs):
            out[i + j] = out[i + j] + A @ B
    return OperatorPolynomial(tuple(out))


def product_of(symbols) -> OperatorPolynomial:
    symbols = list(symbols)
    if not symbols:
        raise DimensionError("product of an empty symbol list")
    return reduce(symbol_product, symbols)


def divisor_pair(
    U: ComplexMatrix, P: ComplexMatrix, tol: Tolerances | None = None
) -> tuple[LinearSymbol, LinearSymbol]:
    """V = U(zP + P⊥) and W = (P + zP⊥)Uᴴ, so that VW = WV = zI."""
    V = symbol_of_model(U, P, tol)
    U, P = to_matrix(U), to_matrix(P)
    eye = identity(U.shape[0])
    Uh = dagger(U)
    W = LinearSymbol((P @ Uh, (eye - P) @ Uh))
    return V, W


__all__ = [
    "LinearSymbol",
    "OperatorPolynomial",
    "divisor_pair",
    "product_of",
    "symbol_of_model",
    "symbol_product",
]
