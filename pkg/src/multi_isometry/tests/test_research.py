import pandas as pd
import pytest

from multi_isometry.errors import PreconditionError
from multi_isometry.research import (
    SWEEPS,
    completion_sweep,
    divisor_sweep,
    pivotal_sweep,
    structure_sweep,
    summarize,
    wold_sweep,
)
from multi_isometry.research.sweeps import _run_trials


def test_completion_sweep():
    df = completion_sweep(trials=12, seed=1, max_dim=4)
    assert len(df) == 12
    assert {"n", "dim", "a", "b", "c", "d", "last_pair", "passed"} <= set(df.columns)
    assert df["passed"].all()
    assert df["last_pair"].max() < 1e-9


def test_completion_sweep_is_reproducible():
    pd.testing.assert_frame_equal(completion_sweep(trials=5, seed=3), completion_sweep(trials=5, seed=3))


def test_divisor_sweep():
    df = divisor_sweep(trials=8, seed=2, max_dim=4)
    assert df["passed"].all()
    assert df[["VW", "WV", "compose"]].to_numpy().max() < 1e-12


def test_pivotal_sweep():
    df = pivotal_sweep(trials=10, seed=4, max_dim=4)
    assert df["passed"].all()
    # instances read off valid 3-tuples always admit P_2
    assert df.loc[df["from_tuple"], "exists_p2"].all()


def test_structure_sweep():
    df = structure_sweep(trials=6, seed=5, max_dim=4)
    assert df["passed"].all()
    assert df["nonet_roundtrip"].max() < 1e-9


def test_wold_sweep():
    df = wold_sweep(trials=10, seed=6, max_dim=4)
    assert df["passed"].all()
    assert df["cnu_orthogonal"].max() < 1e-8
    assert (df["unitary_dim"] + df["cnu_dim"] == df["F"]).all()


def test_sweep_registry():
    assert set(SWEEPS) == {"completion", "divisor", "pivotal", "structure", "wold"}
    assert SWEEPS["divisor"] is divisor_sweep


def test_failed_trials_become_rows():
    def trial(rng):
        if rng.random() < 2:
            raise PreconditionError("not a projection")
        return {"passed": True}

    df = _run_trials(3, 0, trial)
    assert list(df.index) == [0, 1, 2]
    assert not df["passed"].any()
    assert df["error"].str.startswith("PreconditionError").all()


def test_zero_trials():
    assert completion_sweep(trials=0).empty


def test_summarize():
    df = pd.DataFrame({"passed": [True, False], "x": [1.0, 3.0], "label": ["a", "b"]})
    out = summarize(df)
    assert out.loc["passed", "statistic"] == "rate"
    assert out.loc["passed", "value"] == pytest.approx(0.5)
    assert out.loc["x", "value"] == pytest.approx(3.0)
    assert "label" not in out.index
