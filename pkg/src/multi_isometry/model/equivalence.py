"""Unitary equivalence of model tuples and the dimension of their joint commutant."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from multi_isometry.errors import PreconditionError
from multi_isometry.model.model_tuple import ModelTuple
from multi_isometry.numcore import kernel, unitary_residual
from multi_isometry.util import (
    DEFAULT_SEED,
    ComplexMatrix,
    Tolerances,
    fro,
    identity,
    make_rng,
    resolve_tolerances,
)

logger = logging.getLogger(__name__)

EQUIVALENT = "equivalent"
INEQUIVALENT = "inequivalent"
UNDECIDED = "undecided-reducible"

POLAR_ATTEMPTS = 8


@dataclass(frozen=True, eq=False)
class EquivalenceResult:
    status: str
    intertwiner: ComplexMatrix | None = None
    reason: str = ""
    residual: float | None = None

    def __bool__(self) -> bool:
        return self.intertwiner is not None


def _intertwining_system(a: ModelTuple, b: ModelTuple) -> np.ndarray:
    """Rows of X U_j = U'_j X and X P_j = P'_j X acting on vec(X) (column-major)."""
    m, m2 = a.dim_E, b.dim_E
    I_a, I_b = identity(m), identity(m2)
    blocks = []
    for (U, P), (U2, P2) in zip(a.pairs, b.pairs):
        for A, B in ((U, U2), (P, P2)):
            blocks.append(np.kron(I_a, B) - np.kron(A.T, I_b))
    return np.vstack(blocks)


def intertwiner_space(a: ModelTuple, b: ModelTuple, tol: Tolerances | None = None) -> list[ComplexMatrix]:
    """Orthonormal basis (Frobenius) of {X : XU_j = U'_jX, XP_j = P'_jX for all j}."""
    null = kernel(_intertwining_system(a, b), tol)
    return [null.basis[:, k].reshape((b.dim_E, a.dim_E), order="F") for k in range(null.dim)]


def commutant_dimension(t: ModelTuple, tol: Tolerances | None = None) -> int:
    """Dimension of the joint commutant of {U_j, P_j}; 1 iff the tuple is irreducible."""
    return len(intertwiner_space(t, t, tol))


def intertwining_residual(a: ModelTuple, b: ModelTuple, W: ComplexMatrix) -> float:
    r = unitary_residual(W)
    for (U, P), (U2, P2) in zip(a.pairs, b.pairs):
        r = max(r, fro(W @ U - U2 @ W), fro(W @ P - P2 @ W))
    return r


def equivalent(
    a: ModelTuple,
    b: ModelTuple,
    tol: Tolerances | None = None,
    seed: int | np.random.Generator | None = DEFAULT_SEED,
) -> EquivalenceResult:
    """Search for a unitary W with WU_j = U'_jW and WP_j = P'_jW for every j."""
    tol = resolve_tolerances(tol)
    if a.n != b.n:
        raise PreconditionError(f"tuples must have equal n, got {a.n} and {b.n}")
    if a.dim_E != b.dim_E:
        return EquivalenceResult(INEQUIVALENT, reason=f"dimensions differ: {a.dim_E} vs {b.dim_E}")

    space = intertwiner_space(a, b, tol)
    if not space:
        return EquivalenceResult(INEQUIVALENT, reason="no nonzero intertwiner")

    ca, cb = commutant_dimension(a, tol), commutant_dimension(b, tol)
    if ca != cb:
        return EquivalenceResult(INEQUIVALENT, reason=f"commutant dimensions differ: {ca} vs {cb}")

    if ca == 1:
        # irreducible: XᴴX is a positive scalar for any nonzero intertwiner
        X = space[0]
        scale = np.sqrt(np.real(np.trace(X.conj().T @ X)) / a.dim_E)
        W = X / scale
        r = intertwining_residual(a, b, W)
        logger.debug("irreducible intertwiner residual %.3e", r)
        if r <= tol.tol_eq:
            return EquivalenceResult(EQUIVALENT, W, reason="irreducible", residual=r)
        return EquivalenceResult(
            UNDECIDED, reason=f"normalized intertwiner failed certification ({r:.3e})", residual=r
        )

    rng = make_rng(seed)
    best = np.inf
    for attempt in range(POLAR_ATTEMPTS):
        coeffs = rng.standard_normal(len(space)) + 1j * rng.standard_normal(len(space))
        X = sum(c * B for c, B in zip(coeffs, space))
        s = sla.svdvals(X)
        if s[-1] <= np.sqrt(tol.tol_eq) * s[0]:
            continue
        W, _ = sla.polar(X)
        r = intertwining_residual(a, b, W)
        best = min(best, r)
        logger.debug("polar attempt %d residual %.3e", attempt, r)
        if r <= tol.tol_eq:
            return EquivalenceResult(EQUIVALENT, W, reason="polar factor of a generic intertwiner", residual=r)
    return EquivalenceResult(
        UNDECIDED,
        reason=f"no invertible intertwiner in {POLAR_ATTEMPTS} random samples",
        residual=None if best == np.inf else float(best),
    )


__all__ = [
    "EQUIVALENT",
    "INEQUIVALENT",
    "UNDECIDED",
    "EquivalenceResult",
    "commutant_dimension",
    "equivalent",
    "intertwiner_space",
    "intertwining_residual",
]
