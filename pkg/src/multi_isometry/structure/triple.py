"""Model triples (E, U, P) and the (T, Z) parametrization of cnu bi-isometries.

A model triple is the data of the 2-tuple (U, P), (Uᴴ, UP⊥Uᴴ). Writing
F = P⊥E and T = P⊥U|F, the space splits as E = F ⊕ D_T ⊕ F′ and

    U = (J ⊕ I_F′)(I_F ⊕ Z),

with J the Julia–Halmos matrix of T and Z a unitary from D_T ⊕ F′ onto
D_T* ⊕ F′. `triple_from_TZ` assembles U from (T, Z); `extract_TZ` recovers
(T, Z) from U together with the unitary Ω identifying E with F ⊕ D_T ⊕ F′.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from multi_isometry.errors import (
    DimensionError,
    ExtractionError,
    InternalConsistencyError,
    PreconditionError,
)
from multi_isometry.hardy import (
    OperatorPolynomial,
    constants,
    kernel_of_adjoint,
    spread,
    symbol_of_model,
    truncate,
)
from multi_isometry.model import ModelTuple, validate_model
from multi_isometry.numcore import (
    Subspace,
    compress,
    projection_residual,
    span,
    subspace_complement,
    unitary_residual,
)
from multi_isometry.structure.contraction import (
    contraction_parts,
    defect,
    is_c_dot_zero,
    julia_halmos_of,
)
from multi_isometry.util import (
    DEFAULT_TRUNCATION,
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


@dataclass(frozen=True, eq=False)
class ModelTriple:
    U: ComplexMatrix
    P: ComplexMatrix

    @classmethod
    def from_matrices(cls, U, P, tol: Tolerances | None = None) -> "ModelTriple":
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
        return cls(U, P)

    @classmethod
    def from_two_tuple(cls, t: ModelTuple, tol: Tolerances | None = None) -> "ModelTriple":
        """Read (U, P) off a validated model 2-tuple."""
        tol = resolve_tolerances(tol)
        if t.n != 2:
            raise DimensionError(f"a model triple comes from a 2-tuple, got n = {t.n}")
        report = validate_model(t, tol)
        if not report:
            raise PreconditionError(f"2-tuple fails validation: {report.residuals}")
        return cls.from_matrices(*t.pairs[0], tol=tol)

    @property
    def dim_E(self) -> int:
        return self.U.shape[0]

    @property
    def complement(self) -> ComplexMatrix:
        return identity(self.dim_E) - self.P

    def to_model_tuple(self) -> ModelTuple:
        Uh = dagger(self.U)
        return ModelTuple(((self.U, self.P), (Uh, self.U @ self.complement @ Uh)))

    def symbols(self, tol: Tolerances | None = None) -> tuple[OperatorPolynomial, OperatorPolynomial]:
        """Symbols of V₁ = V_{U,P} and V₂ = V_{Uᴴ, UP⊥Uᴴ}."""
        (U1, P1), (U2, P2) = self.to_model_tuple().pairs
        return symbol_of_model(U1, P1, tol), symbol_of_model(U2, P2, tol)

    def __repr__(self) -> str:
        return f"ModelTriple(dim_E={self.dim_E})"


# ----------------------------
# (T, Z) ↔ triple
# ----------------------------


def triple_from_TZ(
    F_dim: int, Fp_dim: int, T: ComplexMatrix, Z: ComplexMatrix, tol: Tolerances | None = None
) -> ModelTriple:
    """U = (J ⊕ I_F′)(I_F ⊕ Z) on F ⊕ D_T ⊕ F′ and P = 0_F ⊕ I."""
    tol = resolve_tolerances(tol)
    T, Z = to_matrix(T, name="T"), to_matrix(Z, name="Z")
    if require_square(T, name="T") != F_dim:
        raise DimensionError(f"T must be {F_dim}×{F_dim}. Got {T.shape}.")
    data = defect(T, tol)
    dT, dTs = data.defect_dims
    expected = (dTs + Fp_dim, dT + Fp_dim)
    if Z.shape != expected:
        raise DimensionError(f"Z must map D_T ⊕ F′ onto D_T* ⊕ F′, shape {expected}. Got {Z.shape}.")
    r = unitary_residual(Z)
    if r > tol.tol_orth:
        raise PreconditionError(f"Z is not unitary (residual {r:.3e})")

    J = julia_halmos_of(data, tol)
    U = sla.block_diag(J, identity(Fp_dim)) @ sla.block_diag(identity(F_dim), Z)
    P = sla.block_diag(np.zeros((F_dim, F_dim)), identity(dT + Fp_dim)).astype(np.complex128)
    return ModelTriple.from_matrices(U, P, tol)


@dataclass(frozen=True, eq=False)
class TZExtraction:
    F_dim: int
    Fp_dim: int
    T: ComplexMatrix
    Z: ComplexMatrix
    omega: ComplexMatrix
    residuals: dict[str, float] = field(default_factory=dict)


def _identify(images: ComplexMatrix, target: Subspace, defect_coords: ComplexMatrix) -> ComplexMatrix:
    """Solve W·defect_coords = targetᴴ·images on the defect range."""
    return dagger(target.basis) @ images @ np.linalg.pinv(defect_coords)


def extract_TZ(triple: ModelTriple, tol: Tolerances | None = None) -> TZExtraction:
    tol = resolve_tolerances(tol)
    U, P = triple.U, triple.P
    Uh = dagger(U)
    F = span(triple.complement, tol)
    Fb = F.basis
    T = compress(U, F)
    data = defect(T, tol)

    D = subspace_complement(F, within=span(np.hstack([Fb, U @ Fb]), tol), tol=tol)
    D_star = subspace_complement(F, within=span(np.hstack([Fb, Uh @ Fb]), tol), tol=tol)
    Fp = subspace_complement(span(np.hstack([Fb, U @ Fb]), tol), tol=tol)
    if D.dim != data.defect_space.dim or D_star.dim != data.defect_space_star.dim:
        raise ExtractionError(
            f"defect ranges do not match: UF ⊖ F has dim {D.dim}, D_T has dim {data.defect_space.dim}"
        )

    W = _identify(U @ Fb, D, dagger(data.defect_space.basis) @ data.D_T)
    W_star = _identify(Uh @ Fb, D_star, dagger(data.defect_space_star.basis) @ data.D_T_star)
    residuals = {
        "W": unitary_residual(W) if W.size else 0.0,
        "W_star": unitary_residual(W_star) if W_star.size else 0.0,
        "W_fit": fro(D.basis @ W @ dagger(data.defect_space.basis) @ data.D_T - D.projector() @ U @ Fb),
        "W_star_fit": fro(
            D_star.basis @ W_star @ dagger(data.defect_space_star.basis) @ data.D_T_star
            - D_star.projector() @ Uh @ Fb
        ),
    }

    omega = np.hstack([Fb, D.basis @ W, Fp.basis])
    omega_p = np.hstack([Fb, D_star.basis @ W_star, Uh @ Fp.basis])
    residuals["omega"] = unitary_residual(omega)
    residuals["omega_p"] = unitary_residual(omega_p)
    bad = {k: v for k, v in residuals.items() if v > tol.tol_orth}
    if bad:
        raise ExtractionError(f"identification residuals too large: {bad}")

    G = dagger(omega_p) @ omega
    f = F.dim
    Z = G[f:, f:]
    residuals["block"] = max(fro(G[:f, f:]), fro(G[f:, :f]), fro(G[:f, :f] - identity(f)))

    rebuilt = triple_from_TZ(f, Fp.dim, T, Z, tol)
    residuals["roundtrip"] = fro(omega @ rebuilt.U @ dagger(omega) - U)
    if max(residuals["block"], residuals["roundtrip"]) > tol.tol_eq:
        raise ExtractionError(f"(T, Z) does not reproduce U: {residuals}")
    logger.debug("extract_TZ: F %d, D_T %d, F' %d, residuals %s", f, D.dim, Fp.dim, residuals)
    return TZExtraction(f, Fp.dim, T, Z, omega, residuals)


# ----------------------------
# Bi-isometry views
# ----------------------------


def pivotal_from_bi_isometry(
    triple: ModelTriple, N: int = DEFAULT_TRUNCATION, tol: Tolerances | None = None
) -> ComplexMatrix:
    """Compression of V₁ to ker V₂* (computed in the truncation window).

    ker V₂* consists of the constants in F, so the result must be T up to the
    basis change between the window kernel and F.
    """
    tol = resolve_tolerances(tol)
    if N < 3:
        raise ValueError(f"N must be >= 3. Got {N}.")
    V1, V2 = triple.symbols(tol)
    K = kernel_of_adjoint(V2, N, tol)
    F = span(triple.complement, tol)
    if K.dim != F.dim:
        raise InternalConsistencyError(f"ker V_2* has dim {K.dim} in the window, expected {F.dim}")
    T_rec = compress(truncate(V1, N).matrix, K)
    A = dagger(K.basis) @ constants(F.basis, N)
    T = compress(triple.U, F)
    r = fro(dagger(A) @ T_rec @ A - T)
    if r > tol.tol_eq:
        raise InternalConsistencyError(f"window pivotal differs from T (residual {r:.3e})")
    return T_rec


@dataclass(frozen=True)
class WoldReport:
    hypothesis_met: bool
    unitary_dim: int
    cnu_dim: int
    residuals: dict[str, float]
    notes: list[str]

    def passed(self, tol: Tolerances | None = None) -> bool:
        tol = resolve_tolerances(tol)
        return self.hypothesis_met and all(
            v <= tol.tol_eq for k, v in self.residuals.items() if k != "cnu_decay"
        )


def wold_reduction_check(
    triple: ModelTriple, N: int = DEFAULT_TRUNCATION, tol: Tolerances | None = None
) -> WoldReport:
    """Check that H²(F_u) carries the unitary part of V₁ and reduces V₂.

    F_u is the unitary part of the pivotal contraction. On the window the
    report measures (i) invariance of H²(F_u) under V₁, V₂ and their
    adjoints, (ii) V₁ acting there as the constant multiplier T_u and
    (iii) V₁* acting on the constants of F as Tᴴ and (iv) the orbit
    V₁ᵏF_cnu staying orthogonal to H²(F_u), with ‖T_cnuᴴᴺ‖ as decay.
    """
    tol = resolve_tolerances(tol)
    notes = ["the reduction statement is checked for C_.0 cnu parts; a C_10 reading is not assumed"]
    F = span(triple.complement, tol)
    T = compress(triple.U, F)
    parts = contraction_parts(T, tol)
    if not is_c_dot_zero(parts.T_cnu, tol):
        notes.append("T_cnu is not C_.0")
        return WoldReport(False, parts.unitary_space.dim, parts.cnu_space.dim, {}, notes)

    V1, V2 = triple.symbols(tol)
    L1, L2 = truncate(V1, N), truncate(V2, N)
    m = triple.dim_E
    Fu = F.basis @ parts.unitary_space.basis
    S = spread(Fu, N)
    proj = S @ dagger(S)
    S_exact = S[:, : Fu.shape[1] * (N - 1)]

    def escape(M: ComplexMatrix, columns: ComplexMatrix) -> float:
        image = M @ columns
        return fro(image - proj @ image)

    residuals = {
        "V1": escape(L1.matrix, S_exact),
        "V2": escape(L2.matrix, S_exact),
        "V1_adjoint": escape(dagger(L1.matrix), S),
        "V2_adjoint": escape(dagger(L2.matrix), S),
    }
    T_u_E = Fu @ parts.T_u @ dagger(Fu)
    residuals["V1_acts_as_T_u"] = fro(L1.matrix @ S_exact - np.kron(identity(N), T_u_E) @ S_exact)

    C = constants(F.basis, N)
    L1h = dagger(L1.matrix)
    power_h = identity(m * N)
    T_power_h = identity(F.dim)
    worst = 0.0
    for _ in range(N):
        power_h = L1h @ power_h
        T_power_h = dagger(T) @ T_power_h
        worst = max(worst, fro(dagger(C) @ power_h @ C - T_power_h))
    residuals["V1_adjoint_on_constants"] = worst

    # H²(F_u) ⊥ V₁ᵏ F_cnu for every k with the image inside the window
    image = constants(F.basis @ parts.cnu_space.basis, N)
    overlap = 0.0
    for _ in range(N):
        overlap = max(overlap, fro(dagger(S) @ image))
        image = L1.matrix @ image
    residuals["cnu_orthogonal"] = overlap
    residuals["cnu_decay"] = op_norm(np.linalg.matrix_power(dagger(parts.T_cnu), N)) if parts.cnu_space.dim else 0.0
    logger.debug("wold reduction: unitary %d, residuals %s", parts.unitary_space.dim, residuals)
    return WoldReport(True, parts.unitary_space.dim, parts.cnu_space.dim, residuals, notes)


def adjoint_power_norms(
    symbol: OperatorPolynomial, coeffs: np.ndarray, iterations: int, N: int | None = None
) -> np.ndarray:
    """‖(A*)ᵏ f‖ for k = 1..iterations, A the analytic multiplier with this symbol.

    The window must hold f; A* maps it into itself, so the values are exact.
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    N = coeffs.shape[0] if N is None else N
    L = truncate(symbol, N)
    Lh = dagger(L.matrix)
    x = np.zeros(L.size, dtype=np.complex128)
    x[: coeffs.size] = coeffs.reshape(-1)
    out = np.empty(iterations)
    for k in range(iterations):
        x = Lh @ x
        out[k] = float(np.linalg.norm(x))
    return out


__all__ = [
    "ModelTriple",
    "TZExtraction",
    "WoldReport",
    "adjoint_power_norms",
    "extract_TZ",
    "pivotal_from_bi_isometry",
    "triple_from_TZ",
    "wold_reduction_check",
]
