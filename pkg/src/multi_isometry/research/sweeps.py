from __future__ import annotations

import logging
from typing import Callable

import numpy as np
import pandas as pd

from multi_isometry.errors import MultiIsometryError
from multi_isometry.hardy import divisor_pair, product_of, symbol_of_model, symbol_product
from multi_isometry.model import complete_tuple, compose, validate_model
from multi_isometry.numcore import invariance_residual, span
from multi_isometry.pivotal import (
    build_3isometry,
    check_p2_conditions,
    pivotal_data,
    w_invariant,
    w_isometry,
)
from multi_isometry.sampling import (
    random_commuting_unitaries,
    random_model_tuple,
    random_nonet_parts,
    random_projection,
    random_sandwich,
    random_subspace,
    random_TZ,
    random_two_tuple,
    random_unitary,
)
from multi_isometry.structure import (
    Nonet,
    extract_TZ,
    nonet_build,
    nonet_extract,
    pivotal_from_bi_isometry,
    triple_from_TZ,
    wold_reduction_check,
)
from multi_isometry.util import DEFAULT_SEED, DEFAULT_TRUNCATION, Tolerances, dagger, fro, identity, make_rng, resolve_tolerances

logger = logging.getLogger(__name__)


# -----------------------------
# Helpers
# -----------------------------

def _coefficient_residual(theta, omega) -> float:
    width = max(len(theta.coeffs), len(omega.coeffs))
    zero = np.zeros_like(theta.coeffs[0])
    a = list(theta.coeffs) + [zero] * (width - len(theta.coeffs))
    b = list(omega.coeffs) + [zero] * (width - len(omega.coeffs))
    return max(fro(x - y) for x, y in zip(a, b))


def _run_trials(trials: int, seed: int, trial: Callable[[np.random.Generator], dict]) -> pd.DataFrame:
    """One row per trial; library errors become a failed row with the message."""
    rng = make_rng(seed)
    rows = []
    for k in range(trials):
        try:
            row = trial(rng)
        except MultiIsometryError as e:
            logger.debug("trial %d failed: %s", k, e)
            row = {"passed": False, "error": f"{type(e).__name__}: {e}"}
        row["trial"] = k
        rows.append(row)
    if not rows:
        return pd.DataFrame()
    return pd.DataFrame(rows).set_index("trial").sort_index()


# -----------------------------
# Sweeps
# -----------------------------

def completion_sweep(
    trials: int = 200, seed: int = DEFAULT_SEED, max_dim: int = 8, tol: Tolerances | None = None
) -> pd.DataFrame:
    """Drop the last pair of a random valid tuple and complete the prefix again."""
    tol = resolve_tolerances(tol)

    def trial(rng: np.random.Generator) -> dict:
        n = int(rng.choice([2, 3]))
        dim = int(rng.integers(1, max_dim + 1))
        t = random_model_tuple(n, dim, rng)
        completed = complete_tuple(t.pairs[:-1], tol)
        res = validate_model(completed, tol).residuals
        U_n, P_n = t.pairs[-1]
        V_n, Q_n = completed.pairs[-1]
        last = max(fro(U_n - V_n), fro(P_n - Q_n))
        return {"n": n, "dim": dim, **res, "last_pair": last, "passed": max(max(res.values()), last) <= tol.tol_eq}

    return _run_trials(trials, seed, trial)


def divisor_sweep(
    trials: int = 100, seed: int = DEFAULT_SEED, max_dim: int = 6, tol: Tolerances | None = None
) -> pd.DataFrame:
    """VW = WV = zI for divisor pairs, and compose against the product symbol."""
    tol = resolve_tolerances(tol)

    def trial(rng: np.random.Generator) -> dict:
        dim = int(rng.integers(1, max_dim + 1))
        U = random_unitary(dim, rng)
        P = random_projection(dim, int(rng.integers(0, dim + 1)), rng)
        V, W = divisor_pair(U, P, tol)
        shift = symbol_of_model(identity(dim), identity(dim), tol)
        vw = _coefficient_residual(product_of([V, W]), shift)
        wv = _coefficient_residual(product_of([W, V]), shift)

        (U1, P1), (U2, P2) = random_two_tuple(dim, rng).pairs
        U12, P12 = compose(U1, P1, U2, P2, tol)
        comp = _coefficient_residual(
            symbol_product(symbol_of_model(U1, P1, tol), symbol_of_model(U2, P2, tol)),
            symbol_of_model(U12, P12, tol),
        )
        return {"dim": dim, "VW": vw, "WV": wv, "compose": comp, "passed": max(vw, wv, comp) <= 1e-12}

    return _run_trials(trials, seed, trial)


def pivotal_sweep(
    trials: int = 100, seed: int = DEFAULT_SEED, max_dim: int = 6, tol: Tolerances | None = None
) -> pd.DataFrame:
    """q_min ⊆ q_max decisions, builds at q_min / q_max and the W-side equivalence.

    Half of the instances are read off valid 3-tuples (where P_2 must exist),
    half are random commuting pairs with a random P_1.
    """
    tol = resolve_tolerances(tol)

    def trial(rng: np.random.Generator) -> dict:
        dim = int(rng.integers(2, max_dim + 1))
        from_tuple = bool(rng.random() < 0.5)
        if from_tuple:
            t = random_model_tuple(3, dim, rng)
            (U1, P1), (U2, _) = t.pairs[0], t.pairs[1]
        else:
            U1, U2 = random_commuting_unitaries(dim, rng)
            P1 = random_projection(dim, int(rng.integers(0, dim + 1)), rng)
        data = pivotal_data(U1, U2, P1, tol)
        row = {
            "dim": dim,
            "from_tuple": from_tuple,
            "q_min_dim": data.q_min.dim,
            "q_max_dim": data.q_max.dim,
            "exists_p2": data.admits_p2,
        }
        if not data.admits_p2:
            row["passed"] = not from_tuple
            return row

        worst_build, worst_balance, worst_products = 0.0, 0.0, 0.0
        for Q in (data.q_min, data.q_max, random_sandwich(data.q_min, data.q_max, data.T_1, rng)):
            built = build_3isometry(U1, U2, P1, Q, tol)
            worst_build = max(worst_build, max(validate_model(built, tol).residuals.values()))
            _, P2 = built.pairs[1]
            worst_balance = max(
                worst_balance,
                fro(P2 + dagger(U2) @ P1 @ U2 - P1 - dagger(U1) @ P2 @ U1),
            )
            worst_products = max(worst_products, max(check_p2_conditions(U1, U2, P1, P2, tol).vanishing_products))

        W = w_isometry(U1, U2, P1, tol)
        # both sides are compared on Q ⊇ q_min; a random extension is rarely invariant
        if rng.random() < 0.5:
            Q = random_sandwich(data.q_min, data.q_max, data.T_1, rng)
        else:
            extra = random_subspace(data.frame.dim, int(rng.integers(0, data.frame.dim + 1)), rng)
            Q = span(np.hstack([data.q_min.basis, extra.basis]), tol)
        t_side = invariance_residual(data.T_1, Q) <= tol.tol_eq
        w_side = w_invariant(U1, U2, P1, Q, tol)
        row.update(
            {
                "build": worst_build,
                "balance": worst_balance,
                "vanishing_products": worst_products,
                "W_unitary": W.unitary_residual,
                "equivalence_agrees": t_side == w_side,
            }
        )
        row["passed"] = max(worst_build, worst_balance, worst_products) <= tol.tol_eq and t_side == w_side
        return row

    return _run_trials(trials, seed, trial)


def structure_sweep(
    trials: int = 100, seed: int = DEFAULT_SEED, max_dim: int = 4, tol: Tolerances | None = None
) -> pd.DataFrame:
    """triple ↔ (T, Z), the window pivotal and Z ↔ nonet roundtrips."""
    tol = resolve_tolerances(tol)

    def trial(rng: np.random.Generator) -> dict:
        F_dim = int(rng.integers(1, max(max_dim - 1, 1) + 1))
        Fp_dim = int(rng.integers(0, max_dim - F_dim + 1))
        T, Z = random_TZ(F_dim, Fp_dim, rng)
        triple = triple_from_TZ(F_dim, Fp_dim, T, Z, tol)
        ext = extract_TZ(triple, tol)
        F = span(triple.complement, tol)
        A = dagger(F.basis[:F_dim])
        tz = fro(A @ T @ dagger(A) - ext.T)
        pivotal_from_bi_isometry(triple, tol=tol)

        parts = random_nonet_parts(F_dim, int(rng.integers(0, F_dim + 1)), rng)
        nonet = Nonet(**parts)
        Z_n, _ = nonet_build(nonet, tol)
        back = nonet_extract(Z_n, parts["Fp"], parts["T"], tol)
        Z_back, _ = nonet_build(back, tol)
        nz = fro(Z_back - Z_n)
        return {
            "F": F_dim,
            "Fp": Fp_dim,
            "T_roundtrip": tz,
            "U_roundtrip": ext.residuals["roundtrip"],
            "nonet_roundtrip": nz,
            "passed": max(tz, ext.residuals["roundtrip"], nz) <= tol.tol_eq,
        }

    return _run_trials(trials, seed, trial)


def wold_sweep(
    trials: int = 50,
    seed: int = DEFAULT_SEED,
    max_dim: int = 4,
    N: int = DEFAULT_TRUNCATION,
    tol: Tolerances | None = None,
) -> pd.DataFrame:
    """Wold reduction on triples built from random (T, Z) with a random unitary part."""
    tol = resolve_tolerances(tol)

    def trial(rng: np.random.Generator) -> dict:
        F_dim = int(rng.integers(1, max(max_dim - 1, 1) + 1))
        Fp_dim = int(rng.integers(0, max_dim - F_dim + 1))
        unitary_dim = int(rng.integers(0, F_dim + 1))
        T, Z = random_TZ(F_dim, Fp_dim, rng, unitary_dim=unitary_dim)
        report = wold_reduction_check(triple_from_TZ(F_dim, Fp_dim, T, Z, tol), N=N, tol=tol)
        row = {"F": F_dim, "Fp": Fp_dim, "unitary_dim": report.unitary_dim, "cnu_dim": report.cnu_dim}
        row.update(report.residuals)
        row["passed"] = report.passed(tol) and report.unitary_dim == unitary_dim
        return row

    return _run_trials(trials, seed, trial)


SWEEPS: dict[str, Callable[..., pd.DataFrame]] = {
    "completion": completion_sweep,
    "divisor": divisor_sweep,
    "pivotal": pivotal_sweep,
    "structure": structure_sweep,
    "wold": wold_sweep,
}


def summarize(df: pd.DataFrame) -> pd.DataFrame:
    """Pass rate for boolean columns, max for numeric ones; one row per column."""
    rows = []
    for col in df.columns:
        s = df[col].dropna()
        if s.empty:
            continue
        if s.dtype == bool:
            rows.append({"column": col, "statistic": "rate", "value": float(s.mean())})
        elif pd.api.types.is_numeric_dtype(s):
            rows.append({"column": col, "statistic": "max", "value": float(s.max())})
    if not rows:
        return pd.DataFrame(columns=["statistic", "value"])
    return pd.DataFrame(rows).set_index("column")
