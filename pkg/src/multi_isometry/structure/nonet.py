"""Nonets: the finer parametrization of the unitary Z of a model triple.

With R ⊆ D_T, R* ⊆ D_T* and a contraction T′ on F′, the unitary
Z: D_T ⊕ F′ → D_T* ⊕ F′ takes the block form

    ℜ            → Y                   (onto ℜ*)
    D_T ⊖ ℜ      → −X T′ᴴ X*ᴴ ⊕ D_T′* X*ᴴ
    F′           →  X D_T′   ⊕ T′

where X: D_T′ → D_T* ⊖ ℜ*, X*: D_T′* → D_T ⊖ ℜ and Y: ℜ → ℜ* are unitary.
All maps are stored in defect-space coordinates (see `ContractionData`).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from multi_isometry.errors import DimensionError, ExtractionError, PreconditionError
from multi_isometry.numcore import Subspace, span, subspace_complement, unitary_residual
from multi_isometry.structure.contraction import defect
from multi_isometry.structure.triple import ModelTriple, triple_from_TZ
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
class Nonet:
    """(F, F′, ℜ, ℜ*, T, T′, X, X*, Y).

    R, R_star are subspaces of the D_T / D_T* coordinate spaces; X has
    shape (dim D_T*, dim D_T′), X_star (dim D_T, dim D_T′*), Y (dim ℜ*, dim ℜ)
    in the bases of R and R_star.
    """

    F: int
    Fp: int
    T: ComplexMatrix
    Tp: ComplexMatrix
    R: Subspace
    R_star: Subspace
    X: ComplexMatrix
    X_star: ComplexMatrix
    Y: ComplexMatrix

    def check(self, tol: Tolerances | None = None) -> dict[str, float]:
        """Residuals of the three unitary identifications; raises on the first violation."""
        tol = resolve_tolerances(tol)
        outer, inner = defect(self.T, tol), defect(self.Tp, tol)
        dT, dTs = outer.defect_dims
        dTp, dTps = inner.defect_dims
        if self.R.ambient_dim != dT or self.R_star.ambient_dim != dTs:
            raise DimensionError("ℜ and ℜ* must live in the D_T and D_T* coordinates")
        if self.X.shape != (dTs, dTp) or self.X_star.shape != (dT, dTps):
            raise DimensionError(f"X {self.X.shape} / X* {self.X_star.shape} do not match the defect dims")
        if self.Y.shape != (self.R_star.dim, self.R.dim):
            raise DimensionError(f"Y must be {self.R_star.dim}×{self.R.dim}. Got {self.Y.shape}.")

        residuals = {
            "X": max(
                fro(dagger(self.X) @ self.X - identity(dTp)),
                fro(self.X @ dagger(self.X) - (identity(dTs) - self.R_star.projector())),
            ),
            "X_star": max(
                fro(dagger(self.X_star) @ self.X_star - identity(dTps)),
                fro(self.X_star @ dagger(self.X_star) - (identity(dT) - self.R.projector())),
            ),
            "Y": unitary_residual(self.Y),
        }
        for name, value in residuals.items():
            if value > tol.tol_orth:
                raise PreconditionError(f"{name} is not a unitary identification (residual {value:.3e})")
        return residuals


def nonet_feasible(T: ComplexMatrix, Tp: ComplexMatrix, tol: Tolerances | None = None) -> bool:
    """dim D_T′ ≤ dim D_T*, dim D_T′* ≤ dim D_T and the two defect sums agree."""
    dT, dTs = defect(T, tol).defect_dims
    dTp, dTps = defect(Tp, tol).defect_dims
    return dTp <= dTs and dTps <= dT and dT + dTp == dTs + dTps


def nonet_build(nonet: Nonet, tol: Tolerances | None = None) -> tuple[ComplexMatrix, ModelTriple]:
    tol = resolve_tolerances(tol)
    if not nonet_feasible(nonet.T, nonet.Tp, tol):
        raise PreconditionError("defect dimensions of T and T′ admit no nonet")
    nonet.check(tol)
    inner = defect(nonet.Tp, tol)
    Dp, Dps = inner.defect_space.basis, inner.defect_space_star.basis
    R, Rs = nonet.R.basis, nonet.R_star.basis
    X, Xs, Tp = nonet.X, nonet.X_star, nonet.Tp

    Z = np.block(
        [
            [Rs @ nonet.Y @ dagger(R) - X @ dagger(Dp) @ dagger(Tp) @ Dps @ dagger(Xs), X @ dagger(Dp) @ inner.D_T],
            [inner.D_T_star @ Dps @ dagger(Xs), Tp],
        ]
    )
    r = unitary_residual(Z)
    if r > tol.tol_orth:
        raise PreconditionError(f"assembled Z is not unitary (residual {r:.3e})")
    logger.debug("nonet_build: Z %s, ℜ dim %d", Z.shape, nonet.R.dim)
    return Z, triple_from_TZ(nonet.F, nonet.Fp, nonet.T, Z, tol)


def nonet_extract(
    Z: ComplexMatrix, Fp_dim: int, T: ComplexMatrix, tol: Tolerances | None = None
) -> Nonet:
    """Split Z back into (ℜ, ℜ*, T′, X, X*, Y); T fixes the D_T / D_T* coordinates."""
    tol = resolve_tolerances(tol)
    Z, T = to_matrix(Z, name="Z"), to_matrix(T, name="T")
    outer = defect(T, tol)
    dT, dTs = outer.defect_dims
    if Z.shape != (dTs + Fp_dim, dT + Fp_dim):
        raise DimensionError(f"Z must be {(dTs + Fp_dim, dT + Fp_dim)}. Got {Z.shape}.")
    r = unitary_residual(Z)
    if r > tol.tol_orth:
        raise PreconditionError(f"Z is not unitary (residual {r:.3e})")

    Tp = Z[dTs:, dT:]
    inner = defect(Tp, tol)
    Dp, Dps = inner.defect_space.basis, inner.defect_space_star.basis
    X = Z[:dTs, dT:] @ np.linalg.pinv(dagger(Dp) @ inner.D_T)
    X_star = dagger(Z)[:dT, dTs:] @ np.linalg.pinv(dagger(Dps) @ inner.D_T_star)

    Zh = dagger(Z)
    E_fp_dom = identity(dT + Fp_dim)[:, dT:]
    E_fp_cod = identity(dTs + Fp_dim)[:, dTs:]
    R_full = subspace_complement(span(np.hstack([E_fp_dom, Zh @ E_fp_cod]), tol), tol=tol)
    Rs_full = subspace_complement(span(np.hstack([E_fp_cod, Z @ E_fp_dom]), tol), tol=tol)
    if fro(R_full.basis[dT:]) > tol.tol_orth or fro(Rs_full.basis[dTs:]) > tol.tol_orth:
        raise ExtractionError("ℜ / ℜ* leak into F′")
    R = Subspace(R_full.basis[:dT])
    R_star = Subspace(Rs_full.basis[:dTs])
    Y = dagger(R_star.basis) @ Z[:dTs, :dT] @ R.basis

    nonet = Nonet(T.shape[0], Fp_dim, T, Tp, R, R_star, X, X_star, Y)
    try:
        nonet.check(tol)
    except (PreconditionError, DimensionError) as e:
        raise ExtractionError(f"nonet identification failed: {e}") from e
    rebuilt, _ = nonet_build(nonet, tol)
    r = fro(rebuilt - Z)
    if r > tol.tol_eq:
        raise ExtractionError(f"nonet does not reproduce Z (residual {r:.3e})")
    return nonet


__all__ = ["Nonet", "nonet_build", "nonet_extract", "nonet_feasible"]
