import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from multi_isometry.classify import Canonical2, canonical2_build
from multi_isometry.errors import CompositionError, HypothesisError, PreconditionError
from multi_isometry.model import (
    EQUIVALENT,
    INEQUIVALENT,
    ModelTuple,
    commutant_dimension,
    complete_tuple,
    compose,
    doubly_commuting,
    doubly_commuting_tuple,
    equivalent,
    rank_accounting,
    validate_model,
)
from multi_isometry.model.equivalence import intertwining_residual
from multi_isometry.sampling import random_model_tuple, random_projection, random_unitary
from multi_isometry.util import dagger


def test_canonical_pair_validates(canonical_pair):
    report = validate_model(canonical_pair)
    assert report.overall
    assert max(report.residuals.values()) < 1e-10
    assert rank_accounting(canonical_pair) == [1, 1]


def test_validation_flags_the_broken_condition(canonical_pair):
    (U_1, P_1), (U_2, P_2) = canonical_pair.pairs
    broken = ModelTuple(((U_1, P_1), (-U_2, P_2)))
    report = validate_model(broken)

    # only the product condition sees the sign flip
    assert not report.passed["b"]
    assert report.passed["a"] and report.passed["c"] and report.passed["d"]
    assert not report


def test_validation_rejects_non_unitary():
    with pytest.raises(PreconditionError):
        ModelTuple.from_pairs([(2 * np.eye(2), np.zeros((2, 2)))])


def test_complete_tuple_formula(rng):
    U = random_unitary(4, rng)
    P = random_projection(4, 2, rng)
    t = complete_tuple([(U, P)])
    U_2, P_2 = t.pairs[1]
    assert np.allclose(U_2, dagger(U))
    assert np.allclose(P_2, np.eye(4) - U @ P @ dagger(U))
    assert validate_model(t).overall


def test_completion_is_unique(rng):
    for dim in (3, 4, 6):
        t = random_model_tuple(3, dim, rng)
        completed = complete_tuple(t.pairs[:-1])
        U, P = t.pairs[-1]
        V, Q = completed.pairs[-1]
        assert np.allclose(U, V, atol=1e-9)
        assert np.allclose(P, Q, atol=1e-9)


def test_complete_tuple_reports_failed_hypothesis(rng):
    A, B = random_unitary(2, rng), random_unitary(2, rng)
    zero = np.zeros((2, 2))
    with pytest.raises(HypothesisError) as info:
        complete_tuple([(A, zero), (B, zero)])
    assert info.value.condition == "commutation"

    P = np.diag([1.0, 0.0])
    with pytest.raises(HypothesisError) as info:
        complete_tuple([(np.eye(2), P), (np.eye(2), P)])
    assert info.value.condition == "balance"


def test_compose_of_a_two_tuple_is_the_shift(canonical_pair):
    (U_1, P_1), (U_2, P_2) = canonical_pair.pairs
    U, P = compose(U_1, P_1, U_2, P_2)
    assert np.allclose(U, np.eye(2), atol=1e-12)
    assert np.allclose(P, np.eye(2), atol=1e-12)


def test_compose_is_associative(rng):
    for dim in (2, 3, 4):
        (U_1, P_1), (U_2, P_2), (U_3, P_3) = random_model_tuple(3, dim, rng).pairs
        left = compose(*compose(U_1, P_1, U_2, P_2), U_3, P_3)
        right = compose(U_1, P_1, *compose(U_2, P_2, U_3, P_3))
        for x, y in zip(left, right):
            assert np.allclose(x, y, atol=1e-10)
        # the full product is z·I
        assert np.allclose(left[0], np.eye(dim), atol=1e-10)
        assert np.allclose(left[1], np.eye(dim), atol=1e-10)


def test_compose_rejects_overlap():
    P = np.diag([1.0, 0.0])
    with pytest.raises(CompositionError) as info:
        compose(np.eye(2), P, np.eye(2), P)
    assert info.value.residual == pytest.approx(1.0)


def test_doubly_commuting():
    U = np.diag([1.0, 1j])
    P = np.diag([0.0, 1.0])
    assert doubly_commuting(U, P)
    assert doubly_commuting_tuple(complete_tuple([(U, P)])) == [True, True]

    # the flip [[0, 1], [1, 0]] moves the range of P out of itself
    assert not doubly_commuting(canonical2_build(Canonical2(0.0, 1.0)).pairs[0][0], P)


# -----------------------------
# equivalence
# -----------------------------


def test_equivalence_recovers_conjugation(canonical_pair, rng):
    W = random_unitary(2, rng)
    other = canonical_pair.conjugate(W)
    result = equivalent(canonical_pair, other)
    assert result.status == EQUIVALENT
    assert intertwining_residual(canonical_pair, other, result.intertwiner) < 1e-9


def test_equivalence_separates_parameters(canonical_pair):
    other = canonical2_build(Canonical2(0.5, 1j))
    result = equivalent(canonical_pair, other)
    assert result.status == INEQUIVALENT
    assert not result


def test_reducible_equivalence_uses_polar_factor(rng):
    a = canonical2_build(Canonical2(0.5, 1.0)).direct_sum(canonical2_build(Canonical2(0.3, 1j)))
    b = a.conjugate(random_unitary(4, rng))
    assert commutant_dimension(a) == 2
    result = equivalent(a, b)
    assert result.status == EQUIVALENT
    assert intertwining_residual(a, b, result.intertwiner) < 1e-9


def test_commutant_of_repeated_block(canonical_pair):
    assert commutant_dimension(canonical_pair) == 1
    assert commutant_dimension(canonical_pair.direct_sum(canonical_pair)) == 4


@seed(3)
@settings(max_examples=20, deadline=None)
@given(dim=st.integers(1, 8), n=st.sampled_from([2, 3]), s=st.integers(0, 2**32 - 1))
def test_random_prefixes_complete_to_valid_tuples(dim, n, s):
    t = random_model_tuple(n, dim, np.random.default_rng(s))
    completed = complete_tuple(t.pairs[:-1])
    assert max(validate_model(completed).residuals.values()) < 1e-9
