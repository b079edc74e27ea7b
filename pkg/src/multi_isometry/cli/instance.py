"""JSON instance and report files.

Instance:
    {"dim": int, "n": int,
     "tuple": [{"U": [[[re, im], ...], ...], "P": [[...]]}, ...],
     "params": {...},          # optional, command specific
     "tolerances": {...}}      # optional, any of tol_orth / tol_rank / tol_eq / tol_spec

Report:
    {"command": str, "input": str, "pass": bool,
     "residuals": {name: float}, "artifacts": {name: ...}, "notes": [str]}

Complex entries are two-element [re, im] arrays. Serialization sorts keys and
writes floats with 17 significant digits, so a normalized file parses and
re-serializes byte-identically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from numbers import Real
from typing import Any

import numpy as np

from multi_isometry.errors import InstanceError
from multi_isometry.model import ModelTuple
from multi_isometry.numcore import Subspace
from multi_isometry.util import ComplexMatrix, Tolerances

INSTANCE_KEYS = frozenset({"dim", "n", "tuple", "params", "tolerances"})
PAIR_KEYS = frozenset({"U", "P"})
TOLERANCE_KEYS = frozenset({"tol_orth", "tol_rank", "tol_eq", "tol_spec"})
REPORT_KEYS = ("command", "input", "pass", "residuals", "artifacts", "notes")


@dataclass(frozen=True, eq=False)
class Instance:
    dim: int
    n: int
    pairs: tuple[tuple[ComplexMatrix, ComplexMatrix], ...]
    params: dict[str, Any] = field(default_factory=dict)
    tolerances: dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_model(cls, t: ModelTuple, params: dict[str, Any] | None = None) -> "Instance":
        return cls(t.dim_E, t.n, tuple(t.pairs), dict(params or {}))

    def model(self) -> ModelTuple:
        return ModelTuple(self.pairs)

    def apply_tolerances(self, base: Tolerances) -> Tolerances:
        return base.replace(**self.tolerances)


# ----------------------------
# Parsing
# ----------------------------


def _is_number(x: Any) -> bool:
    return isinstance(x, Real) and not isinstance(x, bool)


def _complex(node: Any, path: str) -> complex:
    if not (isinstance(node, list) and len(node) == 2 and all(_is_number(v) for v in node)):
        raise InstanceError("complex entries must be [re, im] pairs of numbers", path)
    value = complex(float(node[0]), float(node[1]))
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise InstanceError("complex entry is not finite", path)
    return value


def parse_matrix(node: Any, path: str, *, rows: int | None = None, cols: int | None = None) -> ComplexMatrix:
    """Nested [[ [re, im], ... ], ...] to a complex array; checks rectangularity and optional shape."""
    if not isinstance(node, list):
        raise InstanceError("matrix must be a list of rows", path)
    if rows is not None and len(node) != rows:
        raise InstanceError(f"expected {rows} rows, got {len(node)}", path)
    width = None
    out = []
    for i, row in enumerate(node):
        rpath = f"{path}[{i}]"
        if not isinstance(row, list):
            raise InstanceError("matrix row must be a list", rpath)
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise InstanceError(f"ragged row: length {len(row)}, expected {width}", rpath)
        out.append([_complex(v, f"{rpath}[{j}]") for j, v in enumerate(row)])
    if width is None:
        return np.zeros((0, cols or 0), dtype=np.complex128)
    if cols is not None and width != cols:
        raise InstanceError(f"expected {cols} columns, got {width}", path)
    return np.array(out, dtype=np.complex128).reshape(len(node), width)


def _int_field(doc: dict, key: str, minimum: int) -> int:
    if key not in doc:
        raise InstanceError(f"missing required field {key!r}", "$")
    value = doc[key]
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise InstanceError(f"must be an integer >= {minimum}", f"$.{key}")
    return value


def _reject_unknown(node: dict, allowed: frozenset, path: str) -> None:
    unknown = sorted(set(node) - allowed)
    if unknown:
        raise InstanceError(f"unknown field(s) {unknown}; allowed: {sorted(allowed)}", path)


def instance_from_dict(doc: Any) -> Instance:
    if not isinstance(doc, dict):
        raise InstanceError("instance must be a JSON object", "$")
    _reject_unknown(doc, INSTANCE_KEYS, "$")
    dim = _int_field(doc, "dim", 1)
    n = _int_field(doc, "n", 1)

    pairs_node = doc.get("tuple")
    if not isinstance(pairs_node, list) or len(pairs_node) == 0:
        raise InstanceError("'tuple' must be a non-empty list of {U, P} objects", "$.tuple")
    if len(pairs_node) != n:
        raise InstanceError(f"'n' is {n} but the tuple has {len(pairs_node)} pairs", "$.tuple")
    pairs = []
    for j, entry in enumerate(pairs_node):
        path = f"$.tuple[{j}]"
        if not isinstance(entry, dict):
            raise InstanceError("pair must be an object with 'U' and 'P'", path)
        _reject_unknown(entry, PAIR_KEYS, path)
        for key in ("U", "P"):
            if key not in entry:
                raise InstanceError(f"missing required field {key!r}", path)
        pairs.append(
            (
                parse_matrix(entry["U"], f"{path}.U", rows=dim, cols=dim),
                parse_matrix(entry["P"], f"{path}.P", rows=dim, cols=dim),
            )
        )

    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise InstanceError("'params' must be an object", "$.params")

    tolerances = doc.get("tolerances", {})
    if not isinstance(tolerances, dict):
        raise InstanceError("'tolerances' must be an object", "$.tolerances")
    _reject_unknown(tolerances, TOLERANCE_KEYS, "$.tolerances")
    for key, value in tolerances.items():
        if not _is_number(value) or not value > 0:
            raise InstanceError("tolerance must be a positive number", f"$.tolerances.{key}")

    return Instance(dim, n, tuple(pairs), dict(params), {k: float(v) for k, v in tolerances.items()})


def parse_instance(text: str, source: str = "<string>") -> Instance:
    """Parse instance text; JSON syntax errors carry line and column."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceError(f"invalid JSON in {source}: {e.msg} (line {e.lineno}, column {e.colno})") from e
    return instance_from_dict(doc)


# ----------------------------
# Serialization
# ----------------------------


def encode_matrix(M: ComplexMatrix) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M, dtype=np.complex128)]


def encode_subspace(S: Subspace) -> list:
    return encode_matrix(S.basis)


def instance_to_dict(inst: Instance) -> dict:
    doc: dict[str, Any] = {
        "dim": inst.dim,
        "n": inst.n,
        "tuple": [{"U": encode_matrix(U), "P": encode_matrix(P)} for U, P in inst.pairs],
    }
    if inst.params:
        doc["params"] = inst.params
    if inst.tolerances:
        doc["tolerances"] = inst.tolerances
    return doc


def _float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    return "0" if text == "-0" else text


def _scalar(node: Any) -> str:
    if node is None or isinstance(node, (bool, np.bool_)):
        return json.dumps(None if node is None else bool(node))
    if isinstance(node, (int, np.integer)):
        return str(int(node))
    if isinstance(node, (float, np.floating)):
        return _float(float(node))
    if isinstance(node, (complex, np.complexfloating)):
        return f"[{_float(node.real)}, {_float(node.imag)}]"
    if isinstance(node, str):
        return json.dumps(node, ensure_ascii=False)
    raise TypeError(f"cannot serialize {type(node).__name__}")


def _is_leaf_list(node: Any) -> bool:
    return isinstance(node, (list, tuple)) and all(not isinstance(x, (list, tuple, dict)) for x in node)


def _encode(node: Any, indent: int | None, level: int) -> str:
    if isinstance(node, np.ndarray):
        node = node.tolist()
    if isinstance(node, dict):
        if not node:
            return "{}"
        items = [(str(k), node[k]) for k in sorted(node, key=str)]
        parts = [f"{json.dumps(k, ensure_ascii=False)}: {_encode(v, indent, level + 1)}" for k, v in items]
    elif isinstance(node, (list, tuple)):
        if not node:
            return "[]"
        parts = [_encode(v, indent, level + 1) for v in node]
        if indent is None or _is_leaf_list(node):
            return "[" + ", ".join(parts) + "]"
    else:
        return _scalar(node)
    open_, close = ("{", "}") if isinstance(node, dict) else ("[", "]")
    if indent is None:
        return open_ + ", ".join(parts) + close
    pad = " " * (indent * (level + 1))
    return open_ + "\n" + ",\n".join(pad + p for p in parts) + "\n" + " " * (indent * level) + close


def dumps(node: Any, *, pretty: bool = False) -> str:
    """Sorted keys, 17-significant-digit floats; one line unless pretty."""
    return _encode(node, 2 if pretty else None, 0)


def dump_instance(inst: Instance, *, pretty: bool = False) -> str:
    return dumps(instance_to_dict(inst), pretty=pretty)


def make_report(
    command: str,
    source: str,
    passed: bool,
    residuals: dict[str, float] | None = None,
    artifacts: dict[str, Any] | None = None,
    notes: list[str] | None = None,
) -> dict:
    return {
        "command": command,
        "input": source,
        "pass": bool(passed),
        "residuals": {k: float(v) for k, v in (residuals or {}).items()},
        "artifacts": dict(artifacts or {}),
        "notes": list(notes or []),
    }


__all__ = [
    "Instance",
    "dump_instance",
    "dumps",
    "encode_matrix",
    "encode_subspace",
    "instance_from_dict",
    "instance_to_dict",
    "make_report",
    "parse_instance",
    "parse_matrix",
]
