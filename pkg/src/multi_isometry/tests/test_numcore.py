import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from multi_isometry.errors import ConfigurationError, DimensionError
from multi_isometry.numcore import (
    Subspace,
    invariant_closure,
    is_invariant,
    is_projection,
    is_unitary,
    kernel,
    krylov_span,
    largest_invariant_inside,
    loewner_leq,
    rank,
    span,
    spectral_radius,
    subspace_complement,
    subspace_contains,
    subspace_intersect,
    subspace_sum,
    subspaces_equal,
)
from multi_isometry.sampling import random_projection, random_subspace, random_unitary
from multi_isometry.util import TOLERANCE_ENV_VAR, Tolerances, dagger, to_matrix


# -----------------------------
# util
# -----------------------------


def test_to_matrix_shapes():
    assert to_matrix(2.0).shape == (1, 1)
    assert to_matrix([[1, 2], [3, 4]]).dtype == np.complex128
    with pytest.raises(DimensionError):
        to_matrix(np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        to_matrix([[np.nan, 0], [0, 1]])


def test_tolerances_validation_and_replace():
    with pytest.raises(ValueError):
        Tolerances(tol_eq=-1.0)
    tol = Tolerances().replace(tol_eq=1e-6, tol_rank=None)
    assert tol.tol_eq == 1e-6
    assert tol.tol_rank == Tolerances().tol_rank


def test_looser_tolerances_take_the_maximum():
    a = Tolerances(tol_eq=1e-6, tol_rank=1e-12)
    b = Tolerances(tol_rank=1e-8)
    assert a.looser(b) == Tolerances(tol_eq=1e-6, tol_rank=1e-8)
    assert a.looser(b) == b.looser(a)


def test_tolerance_env_override(monkeypatch):
    monkeypatch.setenv(TOLERANCE_ENV_VAR, "1e-7")
    assert Tolerances.default().tol_eq == pytest.approx(1e-7)

    monkeypatch.setenv(TOLERANCE_ENV_VAR, "tight")
    with pytest.raises(ConfigurationError):
        Tolerances.default()


# -----------------------------
# predicates
# -----------------------------


def test_predicates_on_samples(rng):
    U = random_unitary(4, rng)
    P = random_projection(4, 2, rng)
    assert is_unitary(U)
    assert not is_unitary(2 * U)
    assert is_projection(P)
    assert rank(P) == 2
    assert loewner_leq(P, np.eye(4))
    assert not loewner_leq(np.eye(4), P)


def test_spectral_radius_of_nilpotent(jordan3):
    assert spectral_radius(jordan3) == pytest.approx(0.0, abs=1e-12)


# -----------------------------
# subspaces
# -----------------------------


def test_span_and_kernel():
    M = np.array([[1, 1], [1, 1]], dtype=np.complex128)
    assert span(M).dim == 1
    K = kernel(M)
    assert K.dim == 1
    assert np.allclose(M @ K.basis, 0, atol=1e-12)


def test_lattice_operations_on_coordinates():
    A = Subspace.coordinate(3, [0, 1])
    B = Subspace.coordinate(3, [1, 2])
    assert subspaces_equal(subspace_intersect(A, B), Subspace.coordinate(3, [1]))
    assert subspace_sum(A, B).dim == 3
    assert subspaces_equal(subspace_complement(A), Subspace.coordinate(3, [2]))
    assert subspace_contains(Subspace.coordinate(3, [1]), A)
    assert not subspace_contains(A, B)


@pytest.mark.parametrize(
    "container, expected",
    [
        ([1, 2], [1, 2]),
        ([0, 2], [2]),
        ([0, 1], []),
    ],
)
def test_largest_invariant_inside_jordan(jordan3, container, expected):
    S = largest_invariant_inside(jordan3, Subspace.coordinate(3, container))
    assert subspaces_equal(S, Subspace.coordinate(3, expected))
    assert is_invariant(jordan3, S)


def test_invariant_closure_matches_krylov(jordan3):
    seed_space = Subspace.coordinate(3, [0])
    closure = invariant_closure(jordan3, seed_space)
    assert closure.dim == 3
    assert subspaces_equal(closure, krylov_span(jordan3, seed_space.basis))

    # e1 only generates e1, e2
    assert subspaces_equal(
        invariant_closure(jordan3, Subspace.coordinate(3, [1])), Subspace.coordinate(3, [1, 2])
    )


def test_invariant_closure_of_diagonal_is_eigenspace_sum(rng):
    W = random_unitary(4, rng)
    T = W @ np.diag([0.1, 0.2, 0.3, 0.4]) @ dagger(W)
    S = invariant_closure(T, Subspace(W[:, [0, 2]]))
    assert S.dim == 2
    assert subspaces_equal(S, Subspace(W[:, [0, 2]]))


@seed(7)
@settings(max_examples=25, deadline=None)
@given(m=st.integers(1, 6), k=st.integers(0, 6), s=st.integers(0, 2**32 - 1))
def test_complement_dimensions_add_up(m, k, s):
    k = min(k, m)
    A = random_subspace(m, k, np.random.default_rng(s))
    C = subspace_complement(A)
    assert A.dim + C.dim == m
    assert np.allclose(dagger(A.basis) @ C.basis, 0, atol=1e-10)


@seed(11)
@settings(max_examples=40, deadline=None)
@given(
    M=arrays(
        np.float64,
        (4, 3),
        elements=st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False),
    )
)
def test_span_is_orthonormal_and_reproduces_columns(M):
    S = span(M.astype(np.complex128))
    assert S.orthonormality_residual() < 1e-10
    assert np.allclose(S.projector() @ M, M, atol=1e-7)
