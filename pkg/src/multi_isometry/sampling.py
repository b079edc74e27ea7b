"""Seeded random instances: unitaries, projections, contractions, model tuples, triples, nonets.

Every sampler takes a `numpy.random.Generator` (see `util.make_rng`) so that
a single seed reproduces a whole sweep.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla
from scipy.stats import unitary_group

from multi_isometry.classify.canonical import Canonical3, canonical3_build
from multi_isometry.model import ModelTuple, complete_tuple
from multi_isometry.numcore import Subspace, span, subspace_complement
from multi_isometry.util import ComplexMatrix, dagger, identity, op_norm


def random_unitary(m: int, rng: np.random.Generator) -> ComplexMatrix:
    """Haar unitary (unitary_group needs m ≥ 2)."""
    if m == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    if m == 1:
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return np.asarray(unitary_group.rvs(m, random_state=rng), dtype=np.complex128)


def random_phase(rng: np.random.Generator) -> complex:
    return complex(np.exp(2j * np.pi * rng.random()))


def random_projection(m: int, rank: int, rng: np.random.Generator) -> ComplexMatrix:
    Q = random_unitary(m, rng)[:, :rank]
    return Q @ dagger(Q)


def random_subspace(m: int, k: int, rng: np.random.Generator) -> Subspace:
    return Subspace(random_unitary(m, rng)[:, :k])


def random_commuting_unitaries(m: int, rng: np.random.Generator, count: int = 2) -> list[ComplexMatrix]:
    """Unitaries diagonal in one random basis."""
    W = random_unitary(m, rng)
    return [W @ np.diag(np.exp(2j * np.pi * rng.random(m))) @ dagger(W) for _ in range(count)]


def random_contraction(m: int, rng: np.random.Generator, norm: float = 0.9) -> ComplexMatrix:
    """Random matrix scaled to the given operator norm."""
    if m == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    G = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    return norm * G / op_norm(G)


def random_mixed_contraction(
    unitary_dim: int, cnu_dim: int, rng: np.random.Generator, radius: float = 0.9
) -> ComplexMatrix:
    """Unitary ⊕ strict contraction, conjugated by a random unitary."""
    T = sla.block_diag(random_unitary(unitary_dim, rng), random_contraction(cnu_dim, rng, radius))
    W = random_unitary(unitary_dim + cnu_dim, rng)
    return W @ np.asarray(T, dtype=np.complex128) @ dagger(W)


# ----------------------------
# Model tuples
# ----------------------------


def random_two_tuple(m: int, rng: np.random.Generator, rank: int | None = None) -> ModelTuple:
    rank = int(rng.integers(0, m + 1)) if rank is None else rank
    return complete_tuple([(random_unitary(m, rng), random_projection(m, rank, rng))])


def _with_scalar_slots(block: ModelTuple, n: int, rng: np.random.Generator) -> ModelTuple:
    """Insert n − 2 factors (λI, 0) into a 2-tuple, rescaling the last unitary."""
    m = block.dim_E
    pairs = list(block.pairs)
    scalars = [random_phase(rng) for _ in range(n - 2)]
    for lam in scalars:
        slot = int(rng.integers(0, len(pairs) + 1))
        pairs.insert(slot, (lam * identity(m), np.zeros((m, m), dtype=np.complex128)))
    total = np.prod(scalars) if scalars else 1.0
    U_0, P_0 = pairs[0]
    pairs[0] = (U_0 / total, P_0)
    return ModelTuple(tuple(pairs))


def random_model_tuple(n: int, dim: int, rng: np.random.Generator) -> ModelTuple:
    """Valid model n-tuple on C^dim: a conjugated direct sum of known-valid blocks.

    Blocks are completed 2-tuples padded with scalar factors and, for n = 3,
    irreducible canonical 3-blocks.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2. Got {n}.")
    if n == 2:
        return random_two_tuple(dim, rng)
    blocks: list[ModelTuple] = []
    remaining = dim
    while remaining > 0:
        if n == 3 and remaining >= 3 and rng.random() < 0.5:
            p = Canonical3(
                0.8 * np.sqrt(rng.random()) * random_phase(rng),
                0.8 * np.sqrt(rng.random()) * random_phase(rng),
                random_phase(rng),
                random_phase(rng),
            )
            blocks.append(canonical3_build(p).model)
            remaining -= 3
            continue
        k = int(rng.integers(1, remaining + 1))
        blocks.append(_with_scalar_slots(random_two_tuple(k, rng), n, rng))
        remaining -= k
    t = blocks[0]
    for b in blocks[1:]:
        t = t.direct_sum(b)
    return t.conjugate(random_unitary(dim, rng))


# ----------------------------
# Triples and nonets
# ----------------------------


def random_TZ(
    F_dim: int, Fp_dim: int, rng: np.random.Generator, unitary_dim: int = 0, radius: float = 0.9
) -> tuple[ComplexMatrix, ComplexMatrix]:
    """A contraction T on C^F_dim (with a unitary part of the given size) and a matching Z."""
    T = random_mixed_contraction(unitary_dim, F_dim - unitary_dim, rng, radius)
    d = F_dim - unitary_dim
    return T, random_unitary(d + Fp_dim, rng)


def random_nonet_parts(F_dim: int, r: int, rng: np.random.Generator, radius: float = 0.9) -> dict:
    """Ingredients of a feasible nonet with strict contractions T (on F) and T′ (on F′, dim F − r)."""
    fp = F_dim - r
    T = random_contraction(F_dim, rng, radius)
    Tp = random_contraction(fp, rng, radius)
    R = random_subspace(F_dim, r, rng)
    R_star = random_subspace(F_dim, r, rng)
    X = subspace_complement(R_star).basis @ random_unitary(fp, rng)
    X_star = subspace_complement(R).basis @ random_unitary(fp, rng)
    Y = random_unitary(r, rng)
    return {"F": F_dim, "Fp": fp, "T": T, "Tp": Tp, "R": R, "R_star": R_star, "X": X, "X_star": X_star, "Y": Y}


def random_sandwich(q_min: Subspace, q_max: Subspace, T: ComplexMatrix, rng: np.random.Generator) -> Subspace:
    """A T-invariant subspace between q_min and q_max: q_min plus random eigenvectors of the gap compression."""
    gap = subspace_complement(q_min, within=q_max)
    if gap.dim == 0:
        return q_min
    _, vecs = sla.eig(dagger(gap.basis) @ T @ gap.basis)
    chosen = [k for k in range(gap.dim) if rng.random() < 0.5]
    return span(np.hstack([q_min.basis, gap.basis @ vecs[:, chosen]]))


__all__ = [
    "random_TZ",
    "random_commuting_unitaries",
    "random_contraction",
    "random_mixed_contraction",
    "random_model_tuple",
    "random_nonet_parts",
    "random_phase",
    "random_projection",
    "random_sandwich",
    "random_subspace",
    "random_two_tuple",
    "random_unitary",
]
