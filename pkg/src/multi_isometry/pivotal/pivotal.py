"""Pivotal operator T₁ and the admissible choices of P₂ for a 3-isometry.

Given commuting unitaries U₁, U₂ and a projection P₁ on E, a projection P₂
completing a model 3-isometry exists iff q_min ⊆ q_max, where

  T₁     = P₁⊥U₁ restricted to the range of P₁⊥,
  q_min  = smallest T₁-invariant subspace containing P₁⊥U₂ᴴP₁E,
  q_max  = largest T₁-invariant subspace inside P₁⊥E ⊖ P₁⊥UᴴP₁E,  U = U₁U₂,

and then P₂ = U₁ Q₁ U₁ᴴ for any T₁-invariant Q₁ with q_min ⊆ Q₁ ⊆ q_max.

All subspaces are held in coordinates of one orthonormal basis ("frame") of
the P₁⊥-range; `PivotalData.lift` maps them back into E.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from multi_isometry.errors import InternalConsistencyError, PreconditionError
from multi_isometry.model import ModelTuple, complete_tuple
from multi_isometry.numcore import (
    Subspace,
    compress,
    distance_outside,
    invariance_residual,
    invariant_closure,
    is_isometry,
    krylov_span,
    largest_invariant_inside,
    loewner_leq,
    projection_residual,
    span,
    subspace_complement,
    subspace_contains,
    subspace_intersect,
    subspace_sum,
    subspaces_equal,
    unitary_residual,
)
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

MAX_LATTICE_GAP = 6
SEED_P1 = "p1"
SEED_P2 = "p2"


# ----------------------------
# Pivotal data
# ----------------------------


def _frame(P_1: ComplexMatrix, tol: Tolerances) -> Subspace:
    """Orthonormal basis of the range of P₁⊥."""
    m = P_1.shape[0]
    return span(identity(m) - P_1, tol)


def _check_pair(U_1, P_1, tol: Tolerances) -> None:
    r = unitary_residual(U_1)
    if r > tol.tol_orth:
        raise PreconditionError(f"U_1 is not unitary (residual {r:.3e})")
    r = projection_residual(P_1)
    if r > tol.tol_orth:
        raise PreconditionError(f"P_1 is not an orthogonal projection (residual {r:.3e})")


def _check_commuting(U_1, U_2, tol: Tolerances) -> None:
    r = unitary_residual(U_2)
    if r > tol.tol_orth:
        raise PreconditionError(f"U_2 is not unitary (residual {r:.3e})")
    r = fro(U_1 @ U_2 - U_2 @ U_1)
    if r > tol.tol_eq:
        raise PreconditionError(f"U_1 and U_2 must commute; ‖U_1U_2 − U_2U_1‖ = {r:.3e}")


def pivotal_operator(U_1: ComplexMatrix, P_1: ComplexMatrix, tol: Tolerances | None = None) -> ComplexMatrix:
    """T₁ = P₁⊥U₁|P₁⊥E in the frame of the P₁⊥-range."""
    tol = resolve_tolerances(tol)
    U_1, P_1 = to_matrix(U_1, name="U_1"), to_matrix(P_1, name="P_1")
    _check_pair(U_1, P_1, tol)
    return compress(U_1, _frame(P_1, tol))


def pivotal_is_isometry(U_1: ComplexMatrix, P_1: ComplexMatrix, tol: Tolerances | None = None) -> bool:
    """T₁ isometric ⟺ P₁U₁P₁⊥ = 0 ⟺ the 2-tuple on (U₁, P₁) doubly commutes."""
    return is_isometry(pivotal_operator(U_1, P_1, tol), tol)


@dataclass(frozen=True, eq=False)
class PivotalData:
    U_1: ComplexMatrix
    U_2: ComplexMatrix
    P_1: ComplexMatrix
    frame: Subspace
    T_1: ComplexMatrix
    q_min: Subspace
    q_max: Subspace
    tol: Tolerances = field(default_factory=Tolerances)

    @property
    def dim_E(self) -> int:
        return self.U_1.shape[0]

    def lift(self, S: Subspace) -> Subspace:
        """Frame coordinates → subspace of E."""
        return Subspace(self.frame.basis @ S.basis)

    def lower(self, S: Subspace) -> Subspace:
        """Subspace of E contained in the P₁⊥-range → frame coordinates."""
        return span(dagger(self.frame.basis) @ S.basis, self.tol)

    def p1_range(self) -> Subspace:
        return span(self.P_1, self.tol)

    def q_projection(self, Q: Subspace) -> ComplexMatrix:
        """Projection of E onto the lifted Q."""
        return self.lift(Q).projector()

    @property
    def admits_p2(self) -> bool:
        return subspace_contains(self.q_min, self.q_max, self.tol)


def _seed_min(U_1, U_2, P_1, frame: Subspace, seed: str, P_2, tol: Tolerances) -> Subspace:
    if seed == SEED_P1:
        source = P_1
    elif seed == SEED_P2:
        if P_2 is None:
            raise PreconditionError("seed 'p2' needs P_2")
        source = to_matrix(P_2, name="P_2")
    else:
        raise ValueError(f"Unknown q_min seed {seed!r}. Supported: 'p1', 'p2'")
    return span(dagger(frame.basis) @ dagger(U_2) @ source, tol)


def _q_max_pair(U_1, U_2, P_1, frame: Subspace, T_1, tol: Tolerances) -> tuple[Subspace, Subspace]:
    """q_max from the lattice routine and from the explicit Krylov complement formula."""
    Uh = dagger(U_1 @ U_2)
    forbidden = span(dagger(frame.basis) @ Uh @ P_1, tol)
    container = subspace_complement(forbidden, tol=tol)
    via_lattice = largest_invariant_inside(T_1, container, tol)
    seed = dagger(frame.basis) @ dagger(U_1) @ dagger(U_2) @ P_1
    via_formula = subspace_complement(krylov_span(dagger(T_1), seed, tol=tol), tol=tol)
    return via_lattice, via_formula


def pivotal_data(
    U_1: ComplexMatrix,
    U_2: ComplexMatrix,
    P_1: ComplexMatrix,
    tol: Tolerances | None = None,
    *,
    seed: str = SEED_P1,
    P_2: ComplexMatrix | None = None,
) -> PivotalData:
    tol = resolve_tolerances(tol)
    U_1, U_2, P_1 = (to_matrix(x, name=n) for x, n in ((U_1, "U_1"), (U_2, "U_2"), (P_1, "P_1")))
    _check_pair(U_1, P_1, tol)
    _check_commuting(U_1, U_2, tol)

    frame = _frame(P_1, tol)
    T_1 = compress(U_1, frame)
    qmin = invariant_closure(T_1, _seed_min(U_1, U_2, P_1, frame, seed, P_2, tol), tol)
    qmax, qmax_formula = _q_max_pair(U_1, U_2, P_1, frame, T_1, tol)
    if not subspaces_equal(qmax, qmax_formula, tol):
        raise InternalConsistencyError(
            f"q_max formulas disagree: dims {qmax.dim} vs {qmax_formula.dim}"
        )
    logger.debug("pivotal data: frame dim %d, q_min %d, q_max %d", frame.dim, qmin.dim, qmax.dim)
    return PivotalData(U_1, U_2, P_1, frame, T_1, qmin, qmax, tol)


def q_min(U_1, U_2, P_1, tol: Tolerances | None = None, *, seed: str = SEED_P1, P_2=None) -> Subspace:
    return pivotal_data(U_1, U_2, P_1, tol, seed=seed, P_2=P_2).q_min


def q_max(U_1, U_2, P_1, tol: Tolerances | None = None) -> Subspace:
    return pivotal_data(U_1, U_2, P_1, tol).q_max


# ----------------------------
# Existence of P₂
# ----------------------------


@dataclass(frozen=True, eq=False)
class P2Decision:
    exists: bool
    q_min: Subspace
    q_max: Subspace
    witness: np.ndarray | None = None

    def __bool__(self) -> bool:
        return self.exists


def exists_p2(
    U_1, U_2, P_1, tol: Tolerances | None = None, *, seed: str = SEED_P1, P_2: ComplexMatrix | None = None
) -> P2Decision:
    """Yes iff q_min ⊆ q_max; otherwise the q_min basis vector sticking out the most (in E).

    seed / P_2 select the q_min seed as in `pivotal_data`.
    """
    data = pivotal_data(U_1, U_2, P_1, tol, seed=seed, P_2=P_2)
    if data.admits_p2:
        return P2Decision(True, data.q_min, data.q_max)
    outside = distance_outside(data.q_min, data.q_max)
    k = int(np.argmax(outside))
    witness = data.frame.basis @ data.q_min.basis[:, k]
    logger.debug("exists_p2: no, witness sticks out by %.3e", outside[k])
    return P2Decision(False, data.q_min, data.q_max, witness)


@dataclass(frozen=True)
class P2ConditionReport:
    """Both sides of each equivalence, with the residuals behind them."""

    hypothesis_met: bool
    sides: dict[str, tuple[bool, bool]]
    residuals: dict[str, float]
    vanishing_products: list[float]

    @property
    def consistent(self) -> bool:
        return all(lhs == rhs for lhs, rhs in self.sides.values())

    @property
    def all_hold(self) -> bool:
        return all(lhs and rhs for lhs, rhs in self.sides.values())


def check_p2_conditions(U_1, U_2, P_1, P_2, tol: Tolerances | None = None) -> P2ConditionReport:
    """Evaluate the three pairs of equivalent conditions on a candidate P₂.

    (1) P₂ ≤ P₁ + Q₁           ⟺  Q₁E is T₁-invariant
    (2) Q₂ ≤ P₁ + Q₁           ⟺  Q₁E ⊇ P₁⊥U₂ᴴP₁E
    (3) P₂Q₂ = 0               ⟺  Q₁E ⊆ UᴴP₁⊥E
    with Q₁ = U₁ᴴP₂U₁, Q₂ = U₂ᴴP₁U₂, U = U₁U₂. The equivalences presume P₁ + Q₁ ≤ I.
    """
    tol = resolve_tolerances(tol)
    U_1, U_2, P_1, P_2 = (to_matrix(x) for x in (U_1, U_2, P_1, P_2))
    m = require_square(U_1)
    eye = identity(m)
    P1_perp = eye - P_1
    U = U_1 @ U_2

    Q_1 = dagger(U_1) @ P_2 @ U_1
    r = projection_residual(Q_1)
    if r > tol.tol_orth:
        raise PreconditionError(f"Q_1 = U_1ᴴP_2U_1 is not a projection (residual {r:.3e})")
    Q_2 = dagger(U_2) @ P_1 @ U_2
    R = P_1 + Q_1
    hypothesis = loewner_leq(R, eye, tol)

    residuals: dict[str, float] = {}
    # (1) T₁-invariance of Q₁E, written on E: Q₁⊥ P₁⊥U₁ Q₁ = 0
    residuals["1_rhs"] = fro((eye - Q_1) @ P1_perp @ U_1 @ Q_1)
    # (2) (I − Q₁) P₁⊥U₂ᴴP₁ = 0
    residuals["2_rhs"] = fro((eye - Q_1) @ P1_perp @ dagger(U_2) @ P_1)
    # (3) UᴴP₁U Q₁ = 0
    residuals["3_rhs"] = fro(dagger(U) @ P_1 @ U @ Q_1)
    residuals["3_lhs"] = fro(P_2 @ Q_2)

    sides = {
        "1": (loewner_leq(P_2, R, tol), residuals["1_rhs"] <= tol.tol_eq),
        "2": (loewner_leq(Q_2, R, tol), residuals["2_rhs"] <= tol.tol_eq),
        "3": (residuals["3_lhs"] <= tol.tol_eq, residuals["3_rhs"] <= tol.tol_eq),
    }

    products = []
    step = P1_perp @ U_1
    power = eye
    tail = P1_perp @ dagger(U_2) @ P_1
    for _ in range(m + 1):
        products.append(fro(P_1 @ U @ power @ tail))
        power = step @ power
    return P2ConditionReport(hypothesis, sides, residuals, products)


# ----------------------------
# Building the 3-isometry
# ----------------------------


def build_3isometry(U_1, U_2, P_1, Q_1: Subspace, tol: Tolerances | None = None) -> ModelTuple:
    """Model 3-isometry with P₂ = U₁·proj(Q₁)·U₁ᴴ; Q₁ in frame coordinates."""
    tol = resolve_tolerances(tol)
    data = pivotal_data(U_1, U_2, P_1, tol)
    if Q_1.ambient_dim != data.frame.dim:
        raise PreconditionError(
            f"Q_1 must live in the {data.frame.dim}-dim P_1⊥ frame, got ambient {Q_1.ambient_dim}"
        )
    if not subspace_contains(data.q_min, Q_1, tol):
        raise PreconditionError("Q_1 must contain q_min")
    if not subspace_contains(Q_1, data.q_max, tol):
        raise PreconditionError("Q_1 must lie inside q_max")
    r = invariance_residual(data.T_1, Q_1)
    if r > tol.tol_eq:
        raise PreconditionError(f"Q_1 is not T_1-invariant (residual {r:.3e})")

    U_1, U_2, P_1 = data.U_1, data.U_2, data.P_1
    P_2 = U_1 @ data.q_projection(Q_1) @ dagger(U_1)
    left = P_2 + dagger(U_2) @ P_1 @ U_2
    right = P_1 + dagger(U_1) @ P_2 @ U_1
    r = fro(left - right)
    if r > tol.tol_eq:
        raise InternalConsistencyError(f"balance projections differ by {r:.3e}")
    logger.debug("build_3isometry: Q_1 dim %d, balance residual %.3e", Q_1.dim, r)
    return complete_tuple([(U_1, P_1), (U_2, P_2)], tol)


def is_unitary_component(P: ComplexMatrix, tol: Tolerances | None = None) -> bool:
    """V_{U,P} is unitary iff P = 0."""
    tol = resolve_tolerances(tol)
    return fro(to_matrix(P)) <= tol.tol_eq


# ----------------------------
# The isometry W and the lattice of admissible Q₁
# ----------------------------


def _w_domain(data: PivotalData, Q: Subspace) -> tuple[Subspace, Subspace, Subspace]:
    p1 = data.p1_range()
    q = data.lift(Q)
    return p1, q, Subspace(np.hstack([p1.basis, q.basis]))


def _w_images(data: PivotalData, p1: Subspace, q: Subspace) -> ComplexMatrix:
    """W(x₁ + x₂) = U₂ᴴx₁ + U₁x₂ applied to the concatenated basis."""
    return np.hstack([dagger(data.U_2) @ p1.basis, data.U_1 @ q.basis])


@dataclass(frozen=True, eq=False)
class WIsometry:
    matrix: ComplexMatrix
    domain: Subspace
    unitary_residual: float


def w_isometry(
    U_1, U_2, P_1, tol: Tolerances | None = None, *, seed: str = SEED_P1, P_2: ComplexMatrix | None = None
) -> WIsometry:
    """Matrix of W on P₁E ⊕ q_max in the orthonormal basis [P₁-range, lifted q_max]."""
    tol = resolve_tolerances(tol)
    data = pivotal_data(U_1, U_2, P_1, tol, seed=seed, P_2=P_2)
    if not data.admits_p2:
        raise PreconditionError("w_isometry needs q_min ⊆ q_max")
    p1, q, domain = _w_domain(data, data.q_max)
    images = _w_images(data, p1, q)
    escape = fro(images - domain.projector() @ images)
    if escape > tol.tol_eq:
        raise InternalConsistencyError(f"W leaves P_1E ⊕ q_max (residual {escape:.3e})")
    W = dagger(domain.basis) @ images
    r = unitary_residual(W)
    if r > tol.tol_orth:
        raise InternalConsistencyError(f"W is not unitary (residual {r:.3e})")
    return WIsometry(W, domain, r)


def w_invariant(U_1, U_2, P_1, Q: Subspace, tol: Tolerances | None = None) -> bool:
    """Does W map P₁E + Q (Q in frame coordinates, inside q_max) into itself."""
    tol = resolve_tolerances(tol)
    data = pivotal_data(U_1, U_2, P_1, tol)
    p1, q, domain = _w_domain(data, Q)
    images = _w_images(data, p1, q)
    return fro(images - domain.projector() @ images) <= tol.tol_eq


@dataclass(frozen=True, eq=False)
class LatticeResult:
    enumerable: bool
    subspaces: list[Subspace]
    closed: bool
    reason: str = ""


def _contains_equal(family: list[Subspace], S: Subspace, tol: Tolerances) -> bool:
    return any(subspaces_equal(S, F, tol) for F in family)


def p2_lattice(
    U_1, U_2, P_1, tol: Tolerances | None = None, *, seed: str = SEED_P1, P_2: ComplexMatrix | None = None
) -> LatticeResult:
    """All T₁-invariant Q₁ between q_min and q_max, when the gap spectrum is simple."""
    tol = resolve_tolerances(tol)
    data = pivotal_data(U_1, U_2, P_1, tol, seed=seed, P_2=P_2)
    if not data.admits_p2:
        raise PreconditionError("p2_lattice needs q_min ⊆ q_max")

    gap = subspace_complement(data.q_min, within=data.q_max, tol=tol)
    if gap.dim == 0:
        return LatticeResult(True, [data.q_min], True, "empty gap")
    if gap.dim > MAX_LATTICE_GAP:
        return LatticeResult(False, [], False, f"gap dimension {gap.dim} exceeds {MAX_LATTICE_GAP}")

    C = compress(data.T_1, gap)
    eigvals, eigvecs = sla.eig(C)
    separation = min(
        (abs(a - b) for a, b in itertools.combinations(eigvals, 2)), default=np.inf
    )
    if separation <= np.sqrt(tol.tol_eq):
        return LatticeResult(False, [], False, f"compression has a repeated eigenvalue (gap {separation:.2e})")

    family: list[Subspace] = []
    for size in range(gap.dim + 1):
        for subset in itertools.combinations(range(gap.dim), size):
            directions = gap.basis @ eigvecs[:, list(subset)]
            Q = span(np.hstack([data.q_min.basis, directions]), tol)
            r = invariance_residual(data.T_1, Q)
            if r > tol.tol_eq:
                raise InternalConsistencyError(f"lifted eigenvector subset not T_1-invariant ({r:.3e})")
            p1, q, domain = _w_domain(data, Q)
            W = dagger(domain.basis) @ _w_images(data, p1, q)
            if unitary_residual(W) > tol.tol_orth:
                raise InternalConsistencyError("W restricted to P_1E + Q_1 is not unitary")
            family.append(Q)

    closed = all(
        _contains_equal(family, subspace_intersect(A, B, tol), tol)
        and _contains_equal(family, subspace_sum(A, B, tol), tol)
        for A, B in itertools.combinations(family, 2)
    )
    return LatticeResult(True, family, closed)


__all__ = [
    "LatticeResult",
    "MAX_LATTICE_GAP",
    "SEED_P1",
    "SEED_P2",
    "P2ConditionReport",
    "P2Decision",
    "PivotalData",
    "WIsometry",
    "build_3isometry",
    "check_p2_conditions",
    "exists_p2",
    "is_unitary_component",
    "p2_lattice",
    "pivotal_data",
    "pivotal_is_isometry",
    "pivotal_operator",
    "q_max",
    "q_min",
    "w_invariant",
    "w_isometry",
]
