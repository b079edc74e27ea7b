"""Finite Blaschke products and the model tuples of (S, φ_2(S), ..., φ_n(S)).

For scalar inner functions the tuple (S, φ_2(S), ..., φ_n(S)) on H² is an
n-isometry whose product is a shift of multiplicity m = 1 + Σ deg φ_j. Its
model lives on E = ker V*, V the product; on a truncation window E is
computed as the near-kernel of the truncated adjoint, which is exact for
zeros at the origin and accurate to about ρ^N otherwise (ρ = max |zero|).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from multi_isometry.errors import PreconditionError, ResolutionError
from multi_isometry.hardy import (
    OperatorPolynomial,
    TruncatedOperator,
    exact_columns,
    kernel_of_adjoint,
    truncate,
)
from multi_isometry.model import ModelTuple, validate_model
from multi_isometry.util import (
    ComplexMatrix,
    Tolerances,
    dagger,
    fro,
    identity,
    op_norm,
    resolve_tolerances,
)

logger = logging.getLogger(__name__)

CIRCLE_SAMPLES = 32
TARGET_ACCURACY = 1e-13


@dataclass(frozen=True)
class BlaschkeProduct:
    """constant · Π (z − a_k)/(1 − ā_k z)."""

    zeros: tuple[complex, ...]
    constant: complex = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "zeros", tuple(complex(a) for a in self.zeros))
        if len(self.zeros) == 0:
            raise PreconditionError("a Blaschke product needs at least one zero")
        for a in self.zeros:
            if not abs(a) < 1:
                raise PreconditionError(f"zeros must lie in the open unit disk. Got {a!r}.")
        if abs(abs(self.constant) - 1) > 1e-12:
            raise PreconditionError(f"constant must be unimodular. Got {self.constant!r}.")

    @classmethod
    def mobius(cls, a: complex, constant: complex = 1.0) -> "BlaschkeProduct":
        return cls((a,), constant)

    @classmethod
    def monomial(cls, degree: int) -> "BlaschkeProduct":
        """z^degree."""
        return cls((0.0,) * degree)

    @property
    def degree(self) -> int:
        return len(self.zeros)

    @property
    def radius(self) -> float:
        return max(abs(a) for a in self.zeros)

    def __call__(self, z: complex) -> complex:
        value = complex(self.constant)
        for a in self.zeros:
            value *= (z - a) / (1 - np.conj(a) * z)
        return value


def _factor_taylor(a: complex, K: int) -> np.ndarray:
    """(z − a)/(1 − āz) = −a + Σ_{k≥1} ā^{k−1}(1 − |a|²) z^k."""
    out = np.empty(K, dtype=np.complex128)
    out[0] = -a
    if K > 1:
        out[1:] = (1 - abs(a) ** 2) * np.conj(a) ** np.arange(K - 1)
    return out


def blaschke_taylor(b: BlaschkeProduct, K: int) -> np.ndarray:
    """First K Taylor coefficients of b."""
    if K < 1:
        raise ValueError(f"K must be >= 1. Got {K}.")
    coeffs = reduce(lambda acc, a: np.convolve(acc, _factor_taylor(a, K))[:K], b.zeros, np.array([1.0 + 0j]))
    padded = np.zeros(K, dtype=np.complex128)
    padded[: coeffs.size] = coeffs
    return complex(b.constant) * padded


def circle_residual(b: BlaschkeProduct, samples: int = CIRCLE_SAMPLES) -> float:
    """max | |b(z)| − 1 | over sample points of the unit circle."""
    zs = np.exp(2j * np.pi * np.arange(samples) / samples)
    return max(abs(abs(b(z)) - 1) for z in zs)


def product_taylor(phis: Sequence[BlaschkeProduct], K: int) -> np.ndarray:
    """Taylor coefficients of z · Π φ_j."""
    zeros = [0.0] + [a for phi in phis for a in phi.zeros]
    constant = reduce(lambda acc, phi: acc * complex(phi.constant), phis, 1.0 + 0j)
    return blaschke_taylor(BlaschkeProduct(tuple(zeros), constant), K)


def phi_of_shift(b: BlaschkeProduct, N: int) -> TruncatedOperator:
    """Lower-triangular Toeplitz truncation of φ(S)."""
    if N < b.degree + 2:
        raise ValueError(f"N must be >= degree + 2 = {b.degree + 2}. Got {N}.")
    column = blaschke_taylor(b, N)
    M = sla.toeplitz(column, np.zeros(N, dtype=np.complex128))
    return TruncatedOperator(1, N, M)


def column_norm_defect(op: TruncatedOperator, columns: int) -> float:
    """max | ‖column‖ − 1 | over the first `columns` columns."""
    norms = np.linalg.norm(op.matrix[:, :columns], axis=0)
    return float(np.max(np.abs(norms - 1))) if columns else 0.0


def window_accuracy(phis: Sequence[BlaschkeProduct], N: int) -> float:
    """m·ρ^N, zero when every zero sits at the origin."""
    m = 1 + sum(phi.degree for phi in phis)
    rho = max((phi.radius for phi in phis), default=0.0)
    return 0.0 if rho == 0 else m * rho**N


def default_window(phis: Sequence[BlaschkeProduct]) -> int:
    """Smallest N ≥ 4m (and ≥ 8) with m·ρ^N below TARGET_ACCURACY."""
    m = 1 + sum(phi.degree for phi in phis)
    rho = max((phi.radius for phi in phis), default=0.0)
    N = max(4 * m, 8)
    if rho > 0:
        N = max(N, math.ceil(math.log(TARGET_ACCURACY / m) / math.log(rho)) + m)
    return N


@dataclass(frozen=True, eq=False)
class BlaschkeModel:
    model: ModelTuple
    window: int
    tol_model: float
    residuals: dict[str, float] = field(default_factory=dict)


def _polish(U: ComplexMatrix, P: ComplexMatrix) -> tuple[ComplexMatrix, ComplexMatrix]:
    """Nearest unitary and nearest projection (window noise only)."""
    W, _ = sla.polar(U)
    w, V = sla.eigh(0.5 * (P + dagger(P)))
    keep = V[:, w > 0.5]
    return W, keep @ dagger(keep)


def model_from_blaschke(
    phis: Sequence[BlaschkeProduct], N: int | None = None, tol: Tolerances | None = None
) -> BlaschkeModel:
    """Model tuple of (S, φ_2(S), ..., φ_n(S)).

    On E = ker V* the j-th factor splits as V_j e = A_j e + V B_j e with
    A_j = P_E V_j|E and B_j = V* V_j|E, giving U_j = A_j + B_j and
    P_j = U_jᴴ B_j.
    """
    tol = resolve_tolerances(tol)
    phis = list(phis)
    if not phis:
        raise PreconditionError("need at least one Blaschke product (n >= 2)")
    m = 1 + sum(phi.degree for phi in phis)
    N = default_window(phis) if N is None else N
    if N < 4 * m:
        raise ValueError(f"N must be >= 4m = {4 * m}. Got {N}.")
    tol_model = window_accuracy(phis, N)

    product = OperatorPolynomial.scalar(product_taylor(phis, N))
    cutoff = max(tol.tol_eq, 10 * tol_model)
    E = kernel_of_adjoint(product, N, tol, cutoff=cutoff)
    if E.dim != m:
        raise ResolutionError(f"window N={N} resolves a {E.dim}-dim kernel, expected {m}")
    LB = truncate(product, N).matrix
    s = sla.svdvals(dagger(LB))
    if s[-m - 1] < 0.5:
        raise ResolutionError(f"window N={N} does not separate the kernel (next singular value {s[-m - 1]:.3e})")

    factors = [truncate(OperatorPolynomial.monomial(1, 1), N).matrix] + [phi_of_shift(phi, N).matrix for phi in phis]
    Eb = E.basis
    pairs = []
    for L in factors:
        A = dagger(Eb) @ L @ Eb
        B = dagger(Eb) @ dagger(LB) @ L @ Eb
        U = A + B
        pairs.append(_polish(U, dagger(U) @ B))

    relaxed = tol.replace(tol_eq=max(tol.tol_eq, 100 * tol_model), tol_orth=max(tol.tol_orth, 100 * tol_model))
    t = ModelTuple.from_pairs(pairs, relaxed)
    report = validate_model(t, relaxed)
    if not report:
        raise ResolutionError(f"window model fails validation at N={N}: {report.residuals}")
    logger.debug("model_from_blaschke: m=%d N=%d tol_model=%.2e residuals=%s", m, N, tol_model, report.residuals)
    return BlaschkeModel(t, N, tol_model, dict(report.residuals))


# ----------------------------
# A pair outside the Blaschke family
# ----------------------------


@dataclass(frozen=True)
class NonBlaschkeReport:
    residuals: dict[str, float]
    difference_norms: dict[str, float]
    product_multiplicity: int

    @property
    def passed(self) -> bool:
        return (
            all(v < 1e-14 for v in self.residuals.values())
            and min(self.difference_norms.values()) > 0.9
            and self.product_multiplicity == 4
        )


def nonblaschke_symbols() -> tuple[OperatorPolynomial, OperatorPolynomial]:
    """V_1 = S ⊕ S and V_2 = [[0, S²], [I, 0]] on H² ⊕ H²."""
    zero = np.zeros((2, 2), dtype=np.complex128)
    V1 = OperatorPolynomial.monomial(1, 2)
    V2 = OperatorPolynomial(
        (
            np.array([[0, 0], [1, 0]], dtype=np.complex128),
            zero,
            np.array([[0, 1], [0, 0]], dtype=np.complex128),
        )
    )
    return V1, V2


def nonblaschke_example(N: int = 8, tol: Tolerances | None = None) -> NonBlaschkeReport:
    """V_1² = V_2² although V_1 ≠ ±V_2: the pair is not in the commutant of one shift."""
    if N < 4:
        raise ValueError(f"N must be >= 4. Got {N}.")
    V1, V2 = nonblaschke_symbols()
    L1, L2 = truncate(V1, N), truncate(V2, N)
    A, B = L1.matrix, L2.matrix
    cols = exact_columns(L2, overflow=2).shape[1]
    eye = identity(cols)

    residuals = {
        "commutation": fro(A @ B - B @ A),
        "squares": fro(A @ A - B @ B),
        "factorization": fro((A - B) @ (A + B)),
        "V1_isometry": fro(dagger(A[:, :cols]) @ A[:, :cols] - eye),
        "V2_isometry": fro(dagger(B[:, :cols]) @ B[:, :cols] - eye),
    }
    differences = {"V1-V2": op_norm(A - B), "V1+V2": op_norm(A + B)}
    kernel = kernel_of_adjoint(V1 @ V2, N, tol)
    return NonBlaschkeReport(residuals, differences, kernel.dim)


__all__ = [
    "BlaschkeModel",
    "BlaschkeProduct",
    "NonBlaschkeReport",
    "blaschke_taylor",
    "circle_residual",
    "column_norm_defect",
    "default_window",
    "model_from_blaschke",
    "nonblaschke_example",
    "nonblaschke_symbols",
    "phi_of_shift",
    "product_taylor",
    "window_accuracy",
]
