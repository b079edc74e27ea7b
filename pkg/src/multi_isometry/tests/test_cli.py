import io
import json

import numpy as np
import pytest

from multi_isometry.classify import Canonical2, Canonical3, canonical2_build, canonical3_build
from multi_isometry.cli import Instance, dump_instance, parse_instance
from multi_isometry.cli.main import main
from multi_isometry.errors import InstanceError
from multi_isometry.util import TOLERANCE_ENV_VAR


def _write(tmp_path, name: str, inst: Instance, **extra) -> str:
    doc = json.loads(dump_instance(inst))
    doc.update(extra)
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def _reports(capsys) -> list[dict]:
    return [json.loads(line) for line in capsys.readouterr().out.splitlines() if line.strip()]


@pytest.fixture()
def canonical_file(tmp_path, capsys):
    path = tmp_path / "pair.json"
    assert main(["canonical", "2", "--c", "0.5", "--theta", "1", "-o", str(path)]) == 0
    capsys.readouterr()
    return str(path)


# ---- builders and round trips ----


def test_canonical_builder_writes_a_valid_instance(canonical_file, capsys):
    assert main(["validate", canonical_file]) == 0
    (report,) = _reports(capsys)
    assert report["command"] == "validate"
    assert report["pass"] is True
    assert set(report["residuals"]) == {"a", "b", "c", "d"}
    assert report["artifacts"]["doubly_commuting"] == [False, False]


def test_normalized_file_reserializes_identically(canonical_file):
    text = open(canonical_file, encoding="utf-8").read().rstrip("\n")
    assert dump_instance(parse_instance(text)) == text
    assert dump_instance(parse_instance(dump_instance(parse_instance(text), pretty=True)), pretty=True) == dump_instance(
        parse_instance(text), pretty=True
    )


def test_canonical_params_are_recorded(canonical_file):
    inst = parse_instance(open(canonical_file, encoding="utf-8").read())
    assert inst.params == {"c": [0.5, 0], "theta": [1, 0]}
    assert (inst.dim, inst.n) == (2, 2)


def test_blaschke_builder(capsys):
    assert main(["blaschke", "--phi", "0"]) == 0
    inst = parse_instance(capsys.readouterr().out)
    assert (inst.dim, inst.n) == (2, 2)
    assert inst.params["window"] == 8


def test_builder_input_errors(capsys):
    assert main(["canonical", "2", "--c", "1.5"]) == 2
    assert main(["blaschke", "--phi", "0,nope"]) == 2
    assert capsys.readouterr().out == ""


# ---- instance commands ----


def test_equiv_separates_theta(tmp_path, capsys):
    a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    assert main(["canonical", "2", "--c", "0.5", "--theta", "1", "-o", a]) == 0
    assert main(["canonical", "2", "--c", "0.5", "--theta", "1j", "-o", b]) == 0
    assert main(["equiv", a, a]) == 0
    assert main(["equiv", a, b]) == 1
    first, second = _reports(capsys)
    assert first["artifacts"]["status"] == "equivalent"
    assert second["artifacts"]["status"] == "inequivalent"
    assert second["pass"] is False


def test_equiv_uses_the_looser_file_tolerances(tmp_path, capsys):
    a = _write(tmp_path, "a.json", Instance.from_model(canonical2_build(Canonical2(0.5, 1.0))))
    near = Instance.from_model(canonical2_build(Canonical2(0.5 + 1e-7, 1.0)))
    b = _write(tmp_path, "b.json", near)
    b_loose = _write(tmp_path, "b_loose.json", near, tolerances={"tol_eq": 1e-5, "tol_rank": 1e-5})
    assert main(["equiv", a, b]) == 1
    assert main(["equiv", a, b_loose]) == 0
    assert main(["equiv", b_loose, a]) == 0
    strict, forward, backward = _reports(capsys)
    assert strict["artifacts"]["status"] == "inequivalent"
    assert forward["artifacts"]["status"] == backward["artifacts"]["status"] == "equivalent"
    assert forward["residuals"]["intertwining"] < 1e-5


def test_compose_gives_the_shift(canonical_file, capsys):
    assert main(["compose", canonical_file]) == 0
    (report,) = _reports(capsys)
    composed = report["artifacts"]["instance"]
    assert composed["n"] == 1
    U = np.array(composed["tuple"][0]["U"], dtype=float)[..., 0]
    P = np.array(composed["tuple"][0]["P"], dtype=float)[..., 0]
    assert np.allclose(U, np.eye(2)) and np.allclose(P, np.eye(2))


def test_complete_appends_the_last_pair(tmp_path, canonical_file, capsys):
    inst = parse_instance(open(canonical_file, encoding="utf-8").read())
    head = _write(tmp_path, "head.json", Instance(inst.dim, 1, inst.pairs[:1]))
    assert main(["complete", head]) == 0
    (report,) = _reports(capsys)
    assert report["artifacts"]["instance"]["n"] == 2
    assert max(report["residuals"].values()) < 1e-9


def test_build3_at_q_min(tmp_path, capsys):
    model = canonical3_build(Canonical3(0.3, 0.5j, 1.0, 1j)).model
    path = _write(tmp_path, "three.json", Instance.from_model(model, {"Q1": "min"}))
    assert main(["build3", path]) == 0
    (report,) = _reports(capsys)
    assert report["artifacts"]["instance"]["n"] == 3
    assert "params" not in report["artifacts"]["instance"]


def test_pivotal_without_p2(tmp_path, capsys):
    U_2 = np.roll(np.eye(3), 1, axis=0).astype(np.complex128)
    pairs = ((np.eye(3, dtype=np.complex128), np.diag([0.0, 0.0, 1.0]).astype(np.complex128)), (U_2, np.zeros((3, 3))))
    path = _write(tmp_path, "no.json", Instance(3, 2, pairs))
    assert main(["pivotal", path]) == 1
    (report,) = _reports(capsys)
    assert report["artifacts"]["exists_p2"] is False
    assert "witness" in report["artifacts"]


def _cols(encoded: list) -> int:
    return len(encoded[0]) if encoded else 0


@pytest.mark.parametrize("seed, q_min_dim, lattice_size", [("p1", 0, 4), ("p2", 1, 2)])
def test_pivotal_seed_reaches_the_lattice(tmp_path, capsys, seed, q_min_dim, lattice_size):
    pairs = (
        (np.diag([1, 1j, -1]).astype(np.complex128), np.diag([0.0, 0.0, 1.0]).astype(np.complex128)),
        (np.eye(3, dtype=np.complex128), np.diag([1.0, 0.0, 0.0]).astype(np.complex128)),
    )
    path = _write(tmp_path, f"{seed}.json", Instance(3, 2, pairs, {"seed": seed}))
    assert main(["pivotal", path]) == 0
    (report,) = _reports(capsys)
    artifacts = report["artifacts"]
    assert artifacts["seed"] == seed
    assert _cols(artifacts["q_min"]) == q_min_dim
    assert _cols(artifacts["q_max"]) == 2
    assert len(artifacts["lattice"]) == lattice_size
    assert min(_cols(Q) for Q in artifacts["lattice"]) == q_min_dim


def test_classify_canonical_pair(canonical_file, capsys):
    assert main(["classify", canonical_file]) == 0
    (report,) = _reports(capsys)
    c_re, c_im = report["artifacts"]["canonical2"]["c"]
    assert c_re == pytest.approx(0.5) and c_im == pytest.approx(0, abs=1e-10)
    assert report["artifacts"]["multiplicities"] == [1, 1]
    assert report["artifacts"]["multiplicity_one_holds"] is True
    assert report["artifacts"]["multiplicity_one_index"] == 0


# ---- input errors, batches and output routing ----


def test_unknown_field_is_an_input_error(tmp_path, canonical_file, capsys):
    inst = parse_instance(open(canonical_file, encoding="utf-8").read())
    bad = _write(tmp_path, "bad.json", inst, extra=1)
    assert main(["validate", bad]) == 2
    (report,) = _reports(capsys)
    assert report["pass"] is False
    assert "InstanceError" in report["notes"][0]


def test_empty_tuple_and_bad_json(tmp_path, capsys):
    empty = tmp_path / "empty.json"
    empty.write_text('{"dim": 2, "n": 1, "tuple": []}', encoding="utf-8")
    broken = tmp_path / "broken.json"
    broken.write_text('{"dim": 2,\n "n": ', encoding="utf-8")
    assert main(["validate", str(empty)]) == 2
    assert main(["validate", str(broken)]) == 2
    first, second = _reports(capsys)
    assert "$.tuple" in first["notes"][0]
    assert "line 2" in second["notes"][0]


def test_parse_errors_carry_paths():
    text = '{"dim": 1, "n": 1, "tuple": [{"U": [[[1, 0]]], "P": [[[0]]]}]}'
    with pytest.raises(InstanceError, match=r"\$\.tuple\[0\]\.P\[0\]\[0\]"):
        parse_instance(text)


def test_batch_keeps_input_order(tmp_path, canonical_file, capsys):
    inst = parse_instance(open(canonical_file, encoding="utf-8").read())
    bad = _write(tmp_path, "bad.json", inst, extra=1)
    assert main(["validate", canonical_file, bad, canonical_file, "--jobs", "2"]) == 2
    reports = _reports(capsys)
    assert [r["input"] for r in reports] == [canonical_file, bad, canonical_file]
    assert [r["pass"] for r in reports] == [True, False, True]


def test_out_dir(tmp_path, canonical_file, capsys):
    out = tmp_path / "reports"
    assert main(["validate", canonical_file, "--out-dir", str(out)]) == 0
    assert capsys.readouterr().out == ""
    report = json.loads((out / "pair.validate.json").read_text(encoding="utf-8"))
    assert report["pass"] is True


def test_stdin(monkeypatch, canonical_file, capsys):
    monkeypatch.setattr("sys.stdin", io.StringIO(open(canonical_file, encoding="utf-8").read()))
    assert main(["validate", "-"]) == 0
    (report,) = _reports(capsys)
    assert report["input"] == "-"


def test_bad_environment_tolerance(monkeypatch, canonical_file):
    monkeypatch.setenv(TOLERANCE_ENV_VAR, "tight")
    assert main(["validate", canonical_file]) == 2


def test_sweep_command(tmp_path, capsys):
    assert main(["sweep", "divisor", "--trials", "5", "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "sweep_divisor.csv").exists()
    report = json.loads((tmp_path / "divisor.sweep.json").read_text(encoding="utf-8"))
    assert report["pass"] is True
    assert report["artifacts"]["trials"] == 5
    assert report["artifacts"]["rates"]["passed"] == 1.0
