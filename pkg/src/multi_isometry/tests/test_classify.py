import numpy as np
import pytest

from multi_isometry.classify import (
    BlaschkeProduct,
    Canonical2,
    Canonical3,
    blaschke_taylor,
    canonical2_build,
    canonical2_extract,
    canonical3_build,
    circle_residual,
    column_norm_defect,
    is_irreducible,
    is_pure,
    mobius_of_unitary,
    model_from_blaschke,
    nonblaschke_example,
    normality_obstruction,
    phi_of_shift,
    purity_and_multiplicity,
)
from multi_isometry.classify.invariants import is_scalar_factor, multiplicity_one
from multi_isometry.errors import ClassificationError, PreconditionError
from multi_isometry.model import EQUIVALENT, INEQUIVALENT, complete_tuple, equivalent, validate_model
from multi_isometry.sampling import random_phase, random_unitary
from multi_isometry.util import identity


@pytest.fixture()
def reducible_normal_triple():
    """C ⊕ C² with a diagonal unitary on C², already in normal position."""
    A = np.diag([1j, -1.0])
    P = np.diag([0.0, 1.0])
    one = np.ones((1, 1), dtype=np.complex128)
    zero = np.zeros((1, 1), dtype=np.complex128)

    def direct(a, B):
        out = np.zeros((3, 3), dtype=np.complex128)
        out[:1, :1] = a
        out[1:, 1:] = B
        return out

    prefix = [
        (direct(one, A), direct(zero, P)),
        (direct(one, A.conj().T), direct(zero, np.eye(2) - A @ P @ A.conj().T)),
    ]
    return complete_tuple(prefix)


# ---- n = 2 ----


@pytest.mark.parametrize("c, theta", [(0.5, 1.0), (0.3 + 0.2j, 1j), (-0.7j, np.exp(0.4j))])
def test_canonical2_roundtrip(c, theta):
    t = canonical2_build(Canonical2(c, theta))
    assert validate_model(t).overall
    params = canonical2_extract(t)
    assert params.c == pytest.approx(c, abs=1e-10)
    assert params.theta == pytest.approx(theta, abs=1e-10)


def test_canonical2_is_a_conjugation_invariant(rng):
    t = canonical2_build(Canonical2(0.3 + 0.2j, 1j))
    params = canonical2_extract(t.conjugate(random_unitary(2, rng)))
    assert params.c == pytest.approx(0.3 + 0.2j, abs=1e-9)
    assert params.theta == pytest.approx(1j, abs=1e-9)


def test_canonical2_rejects_reducible_pairs():
    t = complete_tuple([(np.diag([1.0, 1j]), np.diag([0.0, 1.0]))])
    with pytest.raises(ClassificationError):
        canonical2_extract(t)


def test_canonical2_parameter_ranges():
    with pytest.raises(PreconditionError):
        canonical2_build(Canonical2(1.2, 1.0))
    with pytest.raises(PreconditionError):
        canonical2_build(Canonical2(0.5, 2.0))


# ---- n = 3 ----


@pytest.mark.parametrize(
    "params",
    [Canonical3(0.3, 0.5j, 1.0, 1j), Canonical3(-0.2 + 0.4j, 0.25, 1j, -1.0), Canonical3(0.6j, 0.1, -1.0, 1.0)],
)
def test_canonical3_build_certifies(params):
    built = canonical3_build(params)
    assert max(built.residuals.values()) < 1e-9
    assert validate_model(built.model).overall
    assert is_irreducible(built.model)
    assert built.report.irreducibility_consistent
    assert built.report.scalars["alpha"] == pytest.approx(params.alpha, abs=1e-10)


def test_obstruction_on_reducible_triple(reducible_normal_triple):
    (U_1, P_1), (U_2, P_2) = reducible_normal_triple.pairs[:2]
    report = normality_obstruction(U_1, U_2, P_1, P_2)
    assert report.scalars["beta"] == pytest.approx(0)
    assert not report.coupling_nonzero
    assert not report.irreducibility_consistent
    assert not is_irreducible(reducible_normal_triple)


def test_obstruction_needs_normal_position(canonical_pair):
    (U_1, P_1), (U_2, P_2) = canonical_pair.pairs
    with pytest.raises(PreconditionError):
        normality_obstruction(U_1, U_2, P_1, P_2)


def test_mobius_identity_and_inverse(rng):
    U = random_unitary(3, rng)
    assert np.allclose(mobius_of_unitary(U, 0, 1), U)
    V = mobius_of_unitary(U, 0.4j, 1)
    assert np.allclose(mobius_of_unitary(V, -0.4j, 1), U)


# ---- purity and multiplicity ----


def test_multiplicity_of_canonical_pair(canonical_pair):
    report = purity_and_multiplicity(canonical_pair, N=6)
    assert report.multiplicities == [1, 1]
    assert report.product_multiplicity == 2
    assert report.irreducible and report.proper
    assert report.pure == [True, True]
    assert report.product_unitary_part_dim == 0
    assert report.lower_bound_holds is True
    assert report.multiplicity_one_holds is True
    assert report.multiplicity_one_index == 0
    assert report.consistent


def test_multiplicity_one_of_canonical_triple():
    report = purity_and_multiplicity(canonical3_build(Canonical3(0.3, 0.5j, 1.0, 1j)).model)
    assert report.multiplicities == [1, 1, 1]
    assert report.multiplicity_one_holds is True


def test_multiplicity_one_is_not_automatic():
    # ranks summing to at most 2n − 1 always contain a 1; purity and the dim E = n case still bite
    assert multiplicity_one([1, 2], [True, True], 3)
    assert not multiplicity_one([1, 2], [True, False], 3)
    assert not multiplicity_one([2, 2], [True, True], 4)
    assert not multiplicity_one([1, 2, 0], [True, True, True], 3)
    assert multiplicity_one([1, 1, 1], [True, True, True], 3)


def test_multiplicity_one_needs_irreducibility(reducible_normal_triple):
    report = purity_and_multiplicity(reducible_normal_triple)
    assert not report.irreducible
    assert report.multiplicity_one_holds is None
    assert report.lower_bound_holds is None


def test_scalar_factors_are_not_proper():
    assert is_scalar_factor(1j * identity(2), np.zeros((2, 2)))
    assert not is_scalar_factor(np.diag([1.0, -1.0]), np.zeros((2, 2)))
    assert not is_pure(identity(2), np.diag([0.0, 1.0]))


# ---- Blaschke products ----


def test_blaschke_taylor_of_a_mobius_factor():
    coeffs = blaschke_taylor(BlaschkeProduct.mobius(0.5), 3)
    assert coeffs == pytest.approx([-0.5, 0.75, 0.375])
    assert blaschke_taylor(BlaschkeProduct.monomial(2), 4) == pytest.approx([0, 0, 1, 0])


def test_blaschke_is_inner():
    b = BlaschkeProduct((0.3, -0.2j, 0.5 + 0.5j), constant=1j)
    assert circle_residual(b) < 1e-12


def test_blaschke_rejects_bad_data():
    with pytest.raises(PreconditionError):
        BlaschkeProduct(())
    with pytest.raises(PreconditionError):
        BlaschkeProduct((1.0,))
    with pytest.raises(PreconditionError):
        BlaschkeProduct((0.1,), constant=2.0)
    with pytest.raises(ValueError):
        phi_of_shift(BlaschkeProduct.monomial(3), 4)


def test_shift_pair_is_canonical():
    bm = model_from_blaschke([BlaschkeProduct.monomial(1)])
    assert bm.window == 8
    assert bm.tol_model == 0.0
    assert bm.model.dim_E == 2
    assert equivalent(bm.model, canonical2_build(Canonical2(0.0, 1.0)))


def test_blaschke_model_with_off_origin_zeros():
    phis = [BlaschkeProduct.mobius(0.4), BlaschkeProduct.mobius(-0.3j)]
    bm = model_from_blaschke(phis)
    assert bm.model.n == 3
    assert bm.model.dim_E == 3
    assert max(bm.residuals.values()) < 1e-8


def test_blaschke_window_floor():
    with pytest.raises(ValueError):
        model_from_blaschke([BlaschkeProduct.monomial(1)], N=5)


def test_nonblaschke_pair():
    report = nonblaschke_example()
    assert report.passed
    assert report.product_multiplicity == 4


# ---- separation ----


def _random_canonical2(rng) -> Canonical2:
    return Canonical2(0.8 * np.sqrt(rng.random()) * random_phase(rng), random_phase(rng))


def _random_canonical3(rng) -> Canonical3:
    return Canonical3(
        0.8 * np.sqrt(rng.random()) * random_phase(rng),
        0.8 * np.sqrt(rng.random()) * random_phase(rng),
        random_phase(rng),
        random_phase(rng),
    )


def test_canonical2_parameters_separate(rng):
    for _ in range(20):
        a, b = canonical2_build(_random_canonical2(rng)), canonical2_build(_random_canonical2(rng))
        assert equivalent(a, a.conjugate(random_unitary(2, rng))).status == EQUIVALENT
        assert equivalent(a, b).status == INEQUIVALENT


def test_canonical3_parameters_separate(rng):
    for _ in range(20):
        a = canonical3_build(_random_canonical3(rng)).model
        b = canonical3_build(_random_canonical3(rng)).model
        assert equivalent(a, a.conjugate(random_unitary(3, rng))).status == EQUIVALENT
        assert equivalent(a, b).status == INEQUIVALENT


def test_canonical3_fixed_quadruples_separate():
    quadruples = [
        Canonical3(0.3, 0.5j, 1.0, 1j),
        Canonical3(-0.2 + 0.4j, 0.25, 1j, -1.0),
        Canonical3(0.6j, 0.1, -1.0, 1.0),
        Canonical3(0.3, 0.5j, 1.0, -1j),
    ]
    tuples = [canonical3_build(p).model for p in quadruples]
    for i, a in enumerate(tuples):
        for b in tuples[i + 1 :]:
            assert equivalent(a, b).status == INEQUIVALENT


def test_blaschke_models_separate():
    factors = [
        BlaschkeProduct.monomial(1),
        BlaschkeProduct.mobius(0.3),
        BlaschkeProduct.mobius(-0.3j),
        BlaschkeProduct.mobius(0.4 + 0.2j),
        BlaschkeProduct.mobius(-0.45),
    ]
    tuples = [model_from_blaschke([phi]).model for phi in factors]
    for i, a in enumerate(tuples):
        for b in tuples[i + 1 :]:
            assert equivalent(a, b).status == INEQUIVALENT


def test_blaschke_multiplicity_one():
    report = purity_and_multiplicity(model_from_blaschke([BlaschkeProduct.monomial(1)]).model)
    assert report.multiplicities == [1, 1]
    assert report.multiplicity_one_holds is True


# ---- worked examples ----


def test_blaschke_zeros_at_origin_are_exact():
    bm = model_from_blaschke([BlaschkeProduct.monomial(1), BlaschkeProduct.monomial(2)])
    assert bm.tol_model == 0.0
    assert bm.model.dim_E == 4
    assert max(bm.residuals.values()) < 1e-12
    assert validate_model(bm.model).overall


def test_two_shift_factors_have_rank_one_each():
    t = model_from_blaschke([BlaschkeProduct.monomial(1), BlaschkeProduct.monomial(1)]).model
    assert t.n == 3 and t.dim_E == 3
    report = purity_and_multiplicity(t)
    assert report.multiplicities == [1, 1, 1]
    assert report.pure == [True, True, True]


def test_phi_of_shift_columns_are_nearly_unit():
    op = phi_of_shift(BlaschkeProduct.mobius(0.5), 32)
    assert column_norm_defect(op, 16) < 1e-9
    # the last column only keeps φ(0) = −a
    assert column_norm_defect(op, 32) == pytest.approx(0.5)


def test_canonical3_at_the_origin():
    built = canonical3_build(Canonical3(0, 0, 1, 1))
    (U_1, P_1), (U_2, P_2) = built.model.pairs[:2]
    cycle = np.array([[0, 0, -1], [1, 0, 0], [0, 1, 0]], dtype=np.complex128)
    assert np.allclose(U_2, cycle)
    assert np.allclose(U_1, cycle)
    assert np.allclose(P_1, np.diag([0, 0, 1]))
    assert np.allclose(P_2, np.diag([0, 0, 1]))
    assert np.allclose(built.report.N, 0)
    scalars = built.report.scalars
    assert scalars["beta"] == pytest.approx(1)
    assert scalars["epsilon"] == pytest.approx(1)
    assert scalars["eta"] == pytest.approx(0, abs=1e-12)
