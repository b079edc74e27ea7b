"""Canonical forms of irreducible model 2- and 3-isometries of multiplicity n.

n = 2: on C² with P_1 = diag(0, 1) every irreducible pair is equivalent to

    U_1(c, θ) = [[c, dθ], [d, −c̄θ]],   d = (1 − |c|²)^{1/2},

and (c, θ) is a complete set of unitary invariants.

n = 3: with P_1 = e_3e_3ᴴ and U_1ᴴP_2U_1 = e_2e_2ᴴ, U_2 is fixed by
(α, α₁, θ₁) and U_1 is the Möbius image θ(U_2 − α)(I − ᾱU_2)⁻¹.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from multi_isometry.errors import (
    ClassificationError,
    ConstructionError,
    InternalConsistencyError,
    PreconditionError,
)
from multi_isometry.model import ModelTuple, commutant_dimension, complete_tuple, equivalent, validate_model
from multi_isometry.numcore import rank
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


def _check_disk(name: str, value: complex, tol: Tolerances) -> None:
    if not abs(value) < 1 - tol.tol_eq:
        raise PreconditionError(f"|{name}| must be < 1. Got {abs(value):.12g}.")


def _check_circle(name: str, value: complex, tol: Tolerances) -> None:
    if abs(abs(value) - 1) > tol.tol_eq:
        raise PreconditionError(f"|{name}| must be 1. Got {abs(value):.12g}.")


def mobius_of_unitary(U: ComplexMatrix, alpha: complex, theta: complex) -> ComplexMatrix:
    """θ(U − α)(I − ᾱU)⁻¹ for a unitary U and |α| < 1."""
    U = to_matrix(U, name="U")
    eye = identity(U.shape[0])
    return theta * sla.solve(eye - np.conj(alpha) * U, U - alpha * eye)


# ----------------------------
# n = 2
# ----------------------------


@dataclass(frozen=True)
class Canonical2:
    c: complex
    theta: complex

    def validate(self, tol: Tolerances | None = None) -> None:
        tol = resolve_tolerances(tol)
        _check_disk("c", self.c, tol)
        _check_circle("theta", self.theta, tol)

    @property
    def d(self) -> float:
        return float(np.sqrt(1 - abs(self.c) ** 2))

    def unitary(self) -> ComplexMatrix:
        c, d, th = complex(self.c), self.d, complex(self.theta)
        return np.array([[c, d * th], [d, -np.conj(c) * th]], dtype=np.complex128)


def canonical2_build(p: Canonical2, tol: Tolerances | None = None) -> ModelTuple:
    tol = resolve_tolerances(tol)
    p.validate(tol)
    P_1 = np.diag([0.0, 1.0]).astype(np.complex128)
    return complete_tuple([(p.unitary(), P_1)], tol)


def canonical2_extract(t: ModelTuple, tol: Tolerances | None = None, *, verify: bool = True) -> Canonical2:
    """Rotate P_1 to diag(0, 1), make the (2,1) entry of U_1 positive and read (c, θ)."""
    tol = resolve_tolerances(tol)
    if t.n != 2 or t.dim_E != 2:
        raise ClassificationError(f"canonical n=2 form needs n = 2 on C², got n = {t.n}, dim {t.dim_E}")
    if not validate_model(t, tol):
        raise ClassificationError("tuple fails validation")
    U_1, P_1 = t.pairs[0]
    if rank(P_1, tol) != 1:
        raise ClassificationError(f"rank P_1 must be 1, got {rank(P_1, tol)}")
    if commutant_dimension(t, tol) != 1:
        raise ClassificationError("tuple is reducible")

    _, V = sla.eigh(0.5 * (P_1 + dagger(P_1)))
    U = dagger(V) @ U_1 @ V
    lower = U[1, 0]
    if abs(lower) <= tol.tol_eq:
        raise ClassificationError("U_1 leaves the range of P_1 invariant (reducible)")
    D = np.diag([1.0, lower / abs(lower)])
    U = dagger(D) @ U @ D
    d = U[1, 0].real
    params = Canonical2(complex(U[0, 0]), complex(U[0, 1] / d))
    logger.debug("canonical2_extract: c=%s theta=%s", params.c, params.theta)

    if verify:
        res = equivalent(canonical2_build(params, tol), t, tol)
        if not res:
            raise ClassificationError(f"extracted parameters do not reproduce the tuple: {res.reason}")
    return params


# ----------------------------
# n = 3
# ----------------------------


@dataclass(frozen=True)
class Canonical3:
    alpha: complex
    alpha1: complex
    theta: complex
    theta1: complex

    def validate(self, tol: Tolerances | None = None) -> None:
        tol = resolve_tolerances(tol)
        _check_disk("alpha", self.alpha, tol)
        _check_disk("alpha1", self.alpha1, tol)
        _check_circle("theta", self.theta, tol)
        _check_circle("theta1", self.theta1, tol)

    @property
    def d(self) -> float:
        return float(np.sqrt(1 - abs(self.alpha) ** 2))

    @property
    def d1(self) -> float:
        return float(np.sqrt(1 - abs(self.alpha1) ** 2))

    def normal_form(self) -> ComplexMatrix:
        """The unitary in normal position; its adjoint maps e_3 to ᾱe_3 + d e_2."""
        a, a1, t1 = complex(self.alpha), complex(self.alpha1), complex(self.theta1)
        d, d1 = self.d, self.d1
        return np.array(
            [
                [a1, t1 * np.conj(a) * d1, -t1 * d * d1],
                [d1, -t1 * np.conj(a * a1), t1 * np.conj(a1) * d],
                [0, d, a],
            ],
            dtype=np.complex128,
        )


@dataclass(frozen=True, eq=False)
class ObstructionReport:
    N: ComplexMatrix
    scalars: dict[str, complex]
    relation_residuals: dict[str, float]
    vanishes: bool
    moduli_ok: bool
    coupling_nonzero: bool

    @property
    def irreducibility_consistent(self) -> bool:
        return self.vanishes and self.moduli_ok and self.coupling_nonzero


@dataclass(frozen=True, eq=False)
class Canonical3Build:
    model: ModelTuple
    report: ObstructionReport
    residuals: dict[str, float] = field(default_factory=dict)
    relations: tuple[str, ...] = ()


def _normal_position_residual(P_1, P_2, U_1) -> float:
    e2 = np.diag([0.0, 1.0, 0.0])
    e3 = np.diag([0.0, 0.0, 1.0])
    return max(fro(P_1 - e3), fro(dagger(U_1) @ P_2 @ U_1 - e2))


def normality_obstruction(U_1, U_2, P_1, P_2, tol: Tolerances | None = None) -> ObstructionReport:
    """N = (U_1 − η)(U_2ᴴ − ᾱ) − βε for a 3-tuple in normal position.

    The scalars come from U_2ᴴe_3 = ᾱe_3 + βe_2, U_1ᴴU_2ᴴe_3 = γe_3 + δe_1
    and U_1e_2 = εe_3 + ηe_2.
    """
    tol = resolve_tolerances(tol)
    U_1, U_2, P_1, P_2 = (to_matrix(x) for x in (U_1, U_2, P_1, P_2))
    if U_1.shape != (3, 3):
        raise PreconditionError(f"normality obstruction lives on C³, got {U_1.shape}")
    r = _normal_position_residual(P_1, P_2, U_1)
    if r > tol.tol_eq:
        raise PreconditionError(
            f"tuple is not in normal position (residual {r:.3e}); conjugate so that "
            "P_1 = e_3e_3ᴴ and U_1ᴴP_2U_1 = e_2e_2ᴴ first"
        )

    U2h = dagger(U_2)
    w = U2h[:, 2]
    v = dagger(U_1) @ w
    u = U_1[:, 1]
    alpha = np.conj(w[2])
    scalars = {
        "alpha": alpha,
        "beta": w[1],
        "gamma": v[2],
        "delta": v[0],
        "epsilon": u[2],
        "eta": u[1],
    }
    relations = {"U2h_e3": abs(w[0]), "U1h_U2h_e3": abs(v[1]), "U1_e2": abs(u[0])}
    eye = identity(3)
    N = (U_1 - scalars["eta"] * eye) @ (U2h - np.conj(alpha) * eye) - scalars["beta"] * scalars["epsilon"] * eye
    vanishes = fro(N) <= tol.tol_eq
    moduli_ok = abs(alpha) < 1 - tol.tol_eq and abs(scalars["eta"]) < 1 - tol.tol_eq
    coupling = abs(scalars["beta"] * scalars["epsilon"]) > tol.tol_eq
    logger.debug("normality obstruction ‖N‖=%.3e scalars=%s", fro(N), scalars)
    return ObstructionReport(N, scalars, relations, vanishes, moduli_ok, coupling)


def canonical3_build(p: Canonical3, tol: Tolerances | None = None) -> Canonical3Build:
    """U_2 from the normal form, U_1 = θ(U_2 − α)(I − ᾱU_2)⁻¹, P_2 = U_1e_2e_2ᴴU_1ᴴ, then complete."""
    tol = resolve_tolerances(tol)
    p.validate(tol)
    U_2 = p.normal_form()
    U_1 = mobius_of_unitary(U_2, p.alpha, p.theta)
    P_1 = np.diag([0.0, 0.0, 1.0]).astype(np.complex128)
    e2 = U_1[:, [1]]
    P_2 = e2 @ dagger(e2)

    try:
        t = complete_tuple([(U_1, P_1), (U_2, P_2)], tol)
    except (PreconditionError, InternalConsistencyError) as e:
        raise ConstructionError(f"canonical3 completion failed: {e}") from e

    report = normality_obstruction(U_1, U_2, P_1, P_2, tol)
    residuals = dict(validate_model(t, tol).residuals)
    residuals["N"] = fro(report.N)
    residuals["N_e2"] = float(np.linalg.norm(report.N[:, 1]))
    residuals["N_e3"] = float(np.linalg.norm(report.N[:, 2]))
    residuals["theta_relation"] = abs(report.scalars["epsilon"] - p.theta * np.conj(report.scalars["beta"]))
    if max(residuals.values()) > tol.tol_eq:
        raise ConstructionError("canonical3 build failed certification", residuals)
    relations = (
        "U_2ᴴe_3 = ᾱe_3 + d e_2",
        "U_1 = θ(U_2 − α)(I − ᾱU_2)⁻¹",
        "P_2 = U_1 e_2 e_2ᴴ U_1ᴴ",
        "(U_3, P_3) by completion",
    )
    return Canonical3Build(t, report, residuals, relations)


__all__ = [
    "Canonical2",
    "Canonical3",
    "Canonical3Build",
    "ObstructionReport",
    "canonical2_build",
    "canonical2_extract",
    "canonical3_build",
    "mobius_of_unitary",
    "normality_obstruction",
]
