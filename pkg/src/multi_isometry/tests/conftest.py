import numpy as np
import pytest

from multi_isometry.classify import Canonical2, canonical2_build
from multi_isometry.model import ModelTuple
from multi_isometry.util import TOLERANCE_ENV_VAR, Tolerances


@pytest.fixture(autouse=True)
def _default_tolerances(monkeypatch):
    # a developer's MULTIISO_TOL must not leak into the suite
    monkeypatch.delenv(TOLERANCE_ENV_VAR, raising=False)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture()
def tol() -> Tolerances:
    return Tolerances()


@pytest.fixture()
def canonical_pair() -> ModelTuple:
    """Irreducible 2-tuple with c = 0.5, θ = 1."""
    return canonical2_build(Canonical2(0.5, 1.0))


@pytest.fixture()
def jordan3() -> np.ndarray:
    """T e0 = e1, T e1 = e2, T e2 = 0."""
    T = np.zeros((3, 3), dtype=np.complex128)
    T[1, 0] = 1
    T[2, 1] = 1
    return T
