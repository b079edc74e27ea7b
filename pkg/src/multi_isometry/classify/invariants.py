"""Irreducibility, purity and multiplicity bookkeeping for model tuples."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from multi_isometry.hardy import symbol_of_model, unitary_part_truncated
from multi_isometry.model import ModelTuple, commutant_dimension, rank_accounting
from multi_isometry.numcore import compress, span
from multi_isometry.structure import contraction_parts
from multi_isometry.util import (
    DEFAULT_TRUNCATION,
    ComplexMatrix,
    Tolerances,
    fro,
    identity,
    resolve_tolerances,
    to_matrix,
)

logger = logging.getLogger(__name__)


def is_irreducible(t: ModelTuple, tol: Tolerances | None = None) -> bool:
    return commutant_dimension(t, tol) == 1


def is_pure(U: ComplexMatrix, P: ComplexMatrix, tol: Tolerances | None = None) -> bool:
    """V_{U,P} is a pure shift iff P⊥U|P⊥E has no unitary part."""
    tol = resolve_tolerances(tol)
    U, P = to_matrix(U, name="U"), to_matrix(P, name="P")
    F = span(identity(U.shape[0]) - P, tol)
    return contraction_parts(compress(U, F), tol).unitary_space.dim == 0


def is_scalar_factor(U: ComplexMatrix, P: ComplexMatrix, tol: Tolerances | None = None) -> bool:
    """V_{U,P} = λI iff P = 0 and U = λI."""
    tol = resolve_tolerances(tol)
    lam = U[0, 0]
    return fro(P) <= tol.tol_eq and fro(U - lam * identity(U.shape[0])) <= tol.tol_eq


@dataclass(frozen=True)
class MultiplicityReport:
    multiplicities: list[int]
    product_multiplicity: int
    irreducible: bool
    proper: bool
    pure: list[bool]
    product_unitary_part_dim: int
    lower_bound_holds: bool | None
    multiplicity_one_holds: bool | None
    multiplicity_one_index: int | None = None

    @property
    def consistent(self) -> bool:
        return self.lower_bound_holds is not False and self.multiplicity_one_holds is not False


def multiplicity_one(ranks: list[int], pure: list[bool], dim_E: int) -> bool:
    """What an irreducible proper tuple with dim E ≤ 2n − 1 must satisfy.

    Every factor is a pure shift, some factor has multiplicity one, and all
    of them do when dim E = n.
    """
    ones = sum(1 for r in ranks if r == 1)
    if not all(pure) or ones == 0:
        return False
    return dim_E != len(ranks) or ones == len(ranks)


def purity_and_multiplicity(
    t: ModelTuple, N: int = DEFAULT_TRUNCATION, tol: Tolerances | None = None
) -> MultiplicityReport:
    """Per-factor multiplicities (rank P_j) and the general bounds they obey.

    Irreducible proper tuples have dim E ≥ n, and when also dim E ≤ 2n − 1
    they satisfy `multiplicity_one`. A bound that does not apply is None.
    multiplicity_one_index is the first factor (0-based) of rank one, if any.
    """
    tol = resolve_tolerances(tol)
    ranks = rank_accounting(t, tol)
    n, m = t.n, t.dim_E
    irreducible = is_irreducible(t, tol)
    proper = not any(is_scalar_factor(U, P, tol) for U, P in t.pairs)
    pure = [is_pure(U, P, tol) for U, P in t.pairs]
    window = unitary_part_truncated([symbol_of_model(U, P, tol) for U, P in t.pairs], N, tol)

    lower = m >= n if irreducible and proper else None
    one = multiplicity_one(ranks, pure, m) if irreducible and proper and m <= 2 * n - 1 else None
    index = next((j for j, r in enumerate(ranks) if r == 1), None)
    logger.debug("multiplicities %s, irreducible=%s, proper=%s, pure=%s", ranks, irreducible, proper, pure)
    return MultiplicityReport(ranks, m, irreducible, proper, pure, window.dim, lower, one, index)


__all__ = [
    "MultiplicityReport",
    "is_irreducible",
    "is_pure",
    "is_scalar_factor",
    "multiplicity_one",
    "purity_and_multiplicity",
]
