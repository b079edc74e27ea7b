"""Model n-isometries: the (U_j, P_j) data, validation, composition and completion.

A model n-isometry on H²(E) is a tuple of multipliers V_j = U_j(zP_j + P_j⊥)
with unitaries U_j and orthogonal projections P_j on a finite-dimensional E,
subject to four conditions:

  (a) the U_j commute pairwise,
  (b) U_1···U_n = I,
  (c) P_j + U_jᴴP_iU_j = P_i + U_iᴴP_jU_i ≤ I for i ≠ j,
  (d) P_1 + U_1ᴴP_2U_1 + ··· + U_1ᴴ···U_{n−1}ᴴP_nU_{n−1}···U_1 = I.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla

from multi_isometry.errors import (
    CompositionError,
    DimensionError,
    HypothesisError,
    InternalConsistencyError,
    PreconditionError,
)
from multi_isometry.numcore import projection_residual, rank, unitary_residual
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

Pair = tuple[ComplexMatrix, ComplexMatrix]


@dataclass(frozen=True, eq=False)
class ModelTuple:
    """Ordered pairs (U_j, P_j), j = 1..n, all acting on C^dim_E."""

    pairs: tuple[Pair, ...]

    def __post_init__(self) -> None:
        if len(self.pairs) == 0:
            raise DimensionError("a model tuple needs at least one pair")
        m = require_square(self.pairs[0][0], name="U_1")
        for j, (U, P) in enumerate(self.pairs, start=1):
            if U.shape != (m, m) or P.shape != (m, m):
                raise DimensionError(
                    f"pair {j}: expected {m}×{m} matrices, got U {U.shape} and P {P.shape}"
                )

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence], tol: Tolerances | None = None) -> "ModelTuple":
        """Coerce and check: every U_j unitary, every P_j a projection."""
        tol = resolve_tolerances(tol)
        coerced = tuple(
            (to_matrix(U, name=f"U_{j}"), to_matrix(P, name=f"P_{j}"))
            for j, (U, P) in enumerate(pairs, start=1)
        )
        t = cls(coerced)
        t.check_preconditions(tol)
        return t

    # ---- properties ----

    @property
    def n(self) -> int:
        return len(self.pairs)

    @property
    def dim_E(self) -> int:
        return self.pairs[0][0].shape[0]

    @property
    def unitaries(self) -> list[ComplexMatrix]:
        return [U for U, _ in self.pairs]

    @property
    def projections(self) -> list[ComplexMatrix]:
        return [P for _, P in self.pairs]

    def product(self) -> ComplexMatrix:
        return reduce(lambda A, B: A @ B, self.unitaries, identity(self.dim_E))

    def check_preconditions(self, tol: Tolerances | None = None) -> None:
        tol = resolve_tolerances(tol)
        for j, (U, P) in enumerate(self.pairs, start=1):
            r = unitary_residual(U)
            if r > tol.tol_orth:
                raise PreconditionError(f"U_{j} is not unitary (residual {r:.3e})")
            r = projection_residual(P)
            if r > tol.tol_orth:
                raise PreconditionError(f"P_{j} is not an orthogonal projection (residual {r:.3e})")

    # ---- derived tuples ----

    def conjugate(self, W: ComplexMatrix) -> "ModelTuple":
        """(WᴴU_jW, WᴴP_jW)."""
        Wh = dagger(W)
        return ModelTuple(tuple((Wh @ U @ W, Wh @ P @ W) for U, P in self.pairs))

    def direct_sum(self, other: "ModelTuple") -> "ModelTuple":
        if other.n != self.n:
            raise DimensionError(f"direct sum needs equal n, got {self.n} and {other.n}")
        return ModelTuple(
            tuple(
                (sla.block_diag(U, U2), sla.block_diag(P, P2))
                for (U, P), (U2, P2) in zip(self.pairs, other.pairs)
            )
        )

    def __repr__(self) -> str:
        return f"ModelTuple(n={self.n}, dim_E={self.dim_E})"


# ----------------------------
# Validation
# ----------------------------


@dataclass(frozen=True)
class ValidationReport:
    residuals: dict[str, float]
    passed: dict[str, bool]
    pair_residuals: dict[tuple[int, int], float] = field(default_factory=dict)

    @property
    def overall(self) -> bool:
        return all(self.passed.values())

    def __bool__(self) -> bool:
        return self.overall


def _balance(U_i, P_i, U_j, P_j) -> tuple[ComplexMatrix, ComplexMatrix]:
    """Both sides of condition (c): (P_j + U_jᴴP_iU_j, P_i + U_iᴴP_jU_i)."""
    return P_j + dagger(U_j) @ P_i @ U_j, P_i + dagger(U_i) @ P_j @ U_i


def resolution_sum(pairs: Sequence[Pair]) -> ComplexMatrix:
    """P_1 + U_1ᴴP_2U_1 + ··· + (U_1···U_{k−1})ᴴP_k(U_1···U_{k−1})."""
    m = pairs[0][0].shape[0]
    total = np.zeros((m, m), dtype=np.complex128)
    prefix = identity(m)
    for U, P in pairs:
        total = total + dagger(prefix) @ P @ prefix
        prefix = U @ prefix
    return total


def validate_model(t: ModelTuple, tol: Tolerances | None = None) -> ValidationReport:
    """Check conditions (a)-(d) and report the raw residuals."""
    tol = resolve_tolerances(tol)
    t.check_preconditions(tol)
    m = t.dim_E

    res_a = 0.0
    for i in range(t.n):
        for j in range(i + 1, t.n):
            Ui, Uj = t.pairs[i][0], t.pairs[j][0]
            res_a = max(res_a, fro(Ui @ Uj - Uj @ Ui))

    res_b = fro(t.product() - identity(m))

    res_c = 0.0
    pair_res: dict[tuple[int, int], float] = {}
    for i in range(t.n):
        for j in range(t.n):
            if i == j:
                continue
            left, right = _balance(*t.pairs[i], *t.pairs[j])
            r = max(fro(left - right), projection_residual(left))
            pair_res[(i + 1, j + 1)] = r
            res_c = max(res_c, r)

    res_d = fro(resolution_sum(t.pairs) - identity(m))

    residuals = {"a": res_a, "b": res_b, "c": res_c, "d": res_d}
    passed = {k: v <= tol.tol_eq for k, v in residuals.items()}
    logger.debug("validate_model n=%d dim=%d residuals=%s", t.n, m, residuals)
    return ValidationReport(residuals=residuals, passed=passed, pair_residuals=pair_res)


# ----------------------------
# Composition / completion
# ----------------------------


def compose(
    U_1: ComplexMatrix,
    P_1: ComplexMatrix,
    U_2: ComplexMatrix,
    P_2: ComplexMatrix,
    tol: Tolerances | None = None,
) -> tuple[ComplexMatrix, ComplexMatrix]:
    """V_{U_1,P_1}V_{U_2,P_2} = V_{U,P} with U = U_1U_2, P = P_2 + U_2ᴴP_1U_2.

    Requires P_1U_2P_2 = 0, i.e. the two summands of P are orthogonal.
    """
    tol = resolve_tolerances(tol)
    U_1, P_1, U_2, P_2 = (to_matrix(x) for x in (U_1, P_1, U_2, P_2))
    ModelTuple(((U_1, P_1), (U_2, P_2))).check_preconditions(tol)

    overlap = fro(P_1 @ U_2 @ P_2)
    if overlap > tol.tol_eq:
        raise CompositionError(f"P_1 U_2 P_2 must vanish; ‖P_1U_2P_2‖ = {overlap:.3e}", overlap)

    U = U_1 @ U_2
    P = P_2 + dagger(U_2) @ P_1 @ U_2
    r = projection_residual(P)
    if r > tol.tol_orth:
        raise InternalConsistencyError(f"composed P is not a projection (residual {r:.3e})")
    return U, P


def complete_tuple(prefix: Sequence[Sequence], tol: Tolerances | None = None) -> ModelTuple:
    """Append the unique (U_n, P_n) making a model n-isometry.

    U_n = (U_1···U_{n−1})ᴴ and P_n = I − UPUᴴ, where P is the partial
    resolution sum of the prefix.
    """
    tol = resolve_tolerances(tol)
    head = ModelTuple.from_pairs(prefix, tol)
    m, k = head.dim_E, head.n

    for i in range(k):
        for j in range(i + 1, k):
            Ui, Uj = head.pairs[i][0], head.pairs[j][0]
            r = fro(Ui @ Uj - Uj @ Ui)
            if r > tol.tol_eq:
                raise HypothesisError(
                    f"(1) commutation fails for U_{i + 1}, U_{j + 1}: residual {r:.3e}", "commutation", r
                )
            left, right = _balance(*head.pairs[i], *head.pairs[j])
            r = max(fro(left - right), projection_residual(left))
            if r > tol.tol_eq:
                raise HypothesisError(
                    f"(2) balance fails for pair ({i + 1}, {j + 1}): residual {r:.3e}", "balance", r
                )

    P = resolution_sum(head.pairs)
    r = projection_residual(P)
    if r > tol.tol_eq:
        raise HypothesisError(f"(3) partial sum is not a projection ≤ I: residual {r:.3e}", "partial-sum", r)

    U = head.product()
    completed = ModelTuple(head.pairs + ((dagger(U), identity(m) - U @ P @ dagger(U)),))
    report = validate_model(completed, tol)
    if not report.overall:
        raise InternalConsistencyError(f"completed tuple fails validation: {report.residuals}")
    logger.debug("complete_tuple n=%d dim=%d residuals=%s", completed.n, m, report.residuals)
    return completed


# ----------------------------
# Double commutation / ranks
# ----------------------------


def doubly_commuting(U_1: ComplexMatrix, P_1: ComplexMatrix, tol: Tolerances | None = None) -> bool:
    """V_1, V_2 of the 2-tuple built on (U_1, P_1) doubly commute iff P_1U_1P_1⊥ = 0."""
    tol = resolve_tolerances(tol)
    U_1, P_1 = to_matrix(U_1), to_matrix(P_1)
    m = require_square(U_1)
    return fro(P_1 @ U_1 @ (identity(m) - P_1)) <= tol.tol_eq


def doubly_commuting_tuple(t: ModelTuple, tol: Tolerances | None = None) -> list[bool]:
    """Per factor: does U_jᴴ leave the range of P_j invariant."""
    return [doubly_commuting(U, P, tol) for U, P in t.pairs]


def rank_accounting(t: ModelTuple, tol: Tolerances | None = None) -> list[int]:
    """[rank P_1, ..., rank P_n]; they must add up to dim_E."""
    ranks = [rank(P, tol) for P in t.projections]
    if sum(ranks) != t.dim_E:
        raise InternalConsistencyError(f"ranks {ranks} sum to {sum(ranks)}, expected dim_E = {t.dim_E}")
    return ranks


__all__ = [
    "ModelTuple",
    "ValidationReport",
    "complete_tuple",
    "compose",
    "doubly_commuting",
    "doubly_commuting_tuple",
    "rank_accounting",
    "resolution_sum",
    "validate_model",
]
