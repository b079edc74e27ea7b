import numpy as np
import pytest

from multi_isometry.errors import DimensionError, NotAContractionError
from multi_isometry.hardy import OperatorPolynomial
from multi_isometry.model import validate_model
from multi_isometry.numcore import Subspace, span, unitary_residual
from multi_isometry.sampling import (
    random_contraction,
    random_mixed_contraction,
    random_model_tuple,
    random_nonet_parts,
    random_TZ,
    random_unitary,
)
from multi_isometry.structure import (
    ModelTriple,
    Nonet,
    adjoint_power_norms,
    contraction_parts,
    defect,
    extract_TZ,
    is_c_dot_zero,
    julia_halmos,
    nonet_build,
    nonet_extract,
    nonet_feasible,
    pivotal_from_bi_isometry,
    triple_from_TZ,
    wold_reduction_check,
)
from multi_isometry.util import dagger, fro, identity

ROOT = np.sqrt(0.75)


@pytest.fixture()
def scalar_nonet():
    """T = T′ = 1/2 on one-dimensional F and F′ with trivial ℜ, ℜ*."""
    half = np.array([[0.5 + 0j]])
    one = np.array([[1.0 + 0j]])
    return Nonet(
        F=1,
        Fp=1,
        T=half,
        Tp=half,
        R=Subspace.zero(1),
        R_star=Subspace.zero(1),
        X=one,
        X_star=one,
        Y=np.zeros((0, 0), dtype=np.complex128),
    )


# ---- contractions ----


def test_defect_of_scalar_contraction():
    data = defect(0.5 * identity(2))
    assert data.defect_dims == (2, 2)
    assert data.defect_residual() < 1e-12
    assert np.allclose(data.D_T, ROOT * identity(2))


def test_defect_of_unitary_is_trivial(rng):
    assert defect(random_unitary(3, rng)).defect_dims == (0, 0)


def test_defect_rejects_expansion():
    with pytest.raises(NotAContractionError):
        defect(np.diag([1.5, 0.2]))


def test_julia_halmos_is_unitary(rng):
    for unitary_dim, cnu_dim in ((0, 3), (1, 2), (2, 1)):
        T = random_mixed_contraction(unitary_dim, cnu_dim, rng)
        J = julia_halmos(T)
        assert J.shape == (3 + cnu_dim, 3 + cnu_dim)
        assert unitary_residual(J) < 1e-10
        assert np.allclose(J[:3, :3], T)


def test_contraction_parts_split(rng):
    T = random_mixed_contraction(2, 2, rng)
    parts = contraction_parts(T)
    assert parts.unitary_space.dim == 2
    assert parts.cnu_space.dim == 2
    assert parts.reducing_residual(T) < 1e-9
    assert is_c_dot_zero(parts.T_cnu)
    assert not is_c_dot_zero(parts.T_u)


# ---- triples and (T, Z) ----


def test_triple_roundtrip_of_canonical_pair(canonical_pair):
    triple = ModelTriple.from_two_tuple(canonical_pair)
    again = triple.to_model_tuple()
    assert validate_model(again).overall
    for (U, P), (V, Q) in zip(again.pairs, canonical_pair.pairs):
        assert fro(U - V) < 1e-12 and fro(P - Q) < 1e-12


def test_triple_needs_a_two_tuple(rng):
    with pytest.raises(DimensionError):
        ModelTriple.from_two_tuple(random_model_tuple(3, 3, rng))
    with pytest.raises(DimensionError):
        ModelTriple.from_matrices(np.eye(2), np.eye(3))


@pytest.mark.parametrize("F_dim, Fp_dim, unitary_dim", [(1, 0, 0), (2, 1, 0), (3, 2, 1), (3, 1, 2)])
def test_TZ_roundtrip(rng, F_dim, Fp_dim, unitary_dim):
    T, Z = random_TZ(F_dim, Fp_dim, rng, unitary_dim=unitary_dim)
    triple = triple_from_TZ(F_dim, Fp_dim, T, Z)
    assert validate_model(triple.to_model_tuple()).overall

    ext = extract_TZ(triple)
    assert (ext.F_dim, ext.Fp_dim) == (F_dim, Fp_dim)
    A = dagger(span(triple.complement).basis[:F_dim])
    assert fro(A @ T @ dagger(A) - ext.T) < 1e-9
    assert ext.residuals["roundtrip"] < 1e-9
    assert unitary_residual(ext.omega) < 1e-9


def test_triple_from_TZ_checks_shapes(rng):
    T, Z = random_TZ(2, 1, rng)
    with pytest.raises(DimensionError):
        triple_from_TZ(2, 2, T, Z)


def test_pivotal_of_bi_isometry_matches_T(rng):
    T, Z = random_TZ(2, 1, rng)
    triple = triple_from_TZ(2, 1, T, Z)
    T_rec = pivotal_from_bi_isometry(triple, N=5)
    assert T_rec.shape == (2, 2)
    assert np.allclose(np.poly(T_rec), np.poly(T))


def test_wold_reduction_with_unitary_part(rng):
    T, Z = random_TZ(3, 1, rng, unitary_dim=1)
    report = wold_reduction_check(triple_from_TZ(3, 1, T, Z), N=6)
    assert report.hypothesis_met
    assert (report.unitary_dim, report.cnu_dim) == (1, 2)
    assert report.passed()
    assert report.residuals["cnu_decay"] < 1
    assert report.residuals["cnu_orthogonal"] < 1e-9


def test_wold_reduction_on_random_triples(rng):
    for _ in range(50):
        F_dim = int(rng.integers(1, 4))
        Fp_dim = int(rng.integers(0, 3))
        unitary_dim = int(rng.integers(0, F_dim + 1))
        T, Z = random_TZ(F_dim, Fp_dim, rng, unitary_dim=unitary_dim)
        report = wold_reduction_check(triple_from_TZ(F_dim, Fp_dim, T, Z), N=8)
        assert report.hypothesis_met
        assert (report.unitary_dim, report.cnu_dim) == (unitary_dim, F_dim - unitary_dim)
        assert report.passed()
        worst = max(v for k, v in report.residuals.items() if k != "cnu_decay")
        assert worst < 1e-8


def test_wold_reduction_without_unitary_part(rng):
    T, Z = random_TZ(2, 1, rng)
    report = wold_reduction_check(triple_from_TZ(2, 1, T, Z), N=8)
    assert (report.unitary_dim, report.cnu_dim) == (0, 2)
    assert report.passed()
    assert report.residuals["cnu_orthogonal"] == 0.0


def test_wold_reduction_when_P_vanishes(rng):
    triple = ModelTriple.from_matrices(random_unitary(3, rng), np.zeros((3, 3)))
    report = wold_reduction_check(triple, N=8)
    assert (report.unitary_dim, report.cnu_dim) == (3, 0)
    assert report.passed()
    assert report.residuals["cnu_decay"] == 0.0


def test_wold_reduction_of_diagonal_pivotal():
    T = np.diag([1.0, 0.3]).astype(np.complex128)
    triple = triple_from_TZ(2, 1, T, identity(2))
    assert triple.dim_E == 4
    report = wold_reduction_check(triple, N=8)
    assert (report.unitary_dim, report.cnu_dim) == (1, 1)
    assert report.passed()
    assert report.residuals["cnu_orthogonal"] < 1e-12
    assert report.residuals["cnu_decay"] == pytest.approx(0.3**8)


def test_adjoint_powers_of_the_shift():
    norms = adjoint_power_norms(OperatorPolynomial.monomial(1, 1), np.ones((3, 1)), 3)
    assert norms == pytest.approx([np.sqrt(2), 1.0, 0.0])


def test_adjoint_powers_decay_for_strict_constant_term(rng):
    for _ in range(20):
        m = int(rng.integers(1, 4))
        A = OperatorPolynomial((random_contraction(m, rng, 0.9), random_contraction(m, rng, 0.1)))
        f = rng.standard_normal((3, m)) + 1j * rng.standard_normal((3, m))
        norms = adjoint_power_norms(A, f / np.linalg.norm(f), 200)
        assert np.all(np.diff(norms) <= 1e-12)
        assert norms[-1] < 1e-6


def test_adjoint_powers_of_a_unitary_do_not_decay(rng):
    U = OperatorPolynomial((random_unitary(3, rng),))
    f = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    norms = adjoint_power_norms(U, f / np.linalg.norm(f), 200)
    assert norms == pytest.approx(np.ones(200))


# ---- nonets ----


def test_scalar_nonet_builds_the_expected_Z(scalar_nonet):
    Z, triple = nonet_build(scalar_nonet)
    assert np.allclose(Z, [[-0.5, ROOT], [ROOT, 0.5]])
    assert triple.dim_E == 3

    back = nonet_extract(Z, 1, scalar_nonet.T)
    assert back.Tp[0, 0] == pytest.approx(0.5)
    assert back.R.dim == 0 and back.R_star.dim == 0


def test_nonet_feasibility():
    assert nonet_feasible(0.5 * identity(2), 0.5 * identity(2))
    assert not nonet_feasible(np.zeros((2, 2)), np.zeros((3, 3)))


def test_nonet_roundtrip(rng):
    for F_dim, r in ((1, 0), (2, 1), (3, 1), (3, 2)):
        parts = random_nonet_parts(F_dim, r, rng)
        Z, triple = nonet_build(Nonet(**parts))
        assert validate_model(triple.to_model_tuple()).overall
        back = nonet_extract(Z, parts["Fp"], parts["T"])
        assert back.R.dim == r and back.R_star.dim == r
        assert fro(nonet_build(back)[0] - Z) < 1e-9
