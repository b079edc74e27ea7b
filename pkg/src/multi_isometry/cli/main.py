"""`multiiso` command line.

Usage examples:
  # check conditions (a)-(d) on several instance files, two at a time
  multiiso validate a.json b.json --jobs 2 --out-dir reports

  # the irreducible 2-isometry with c = 0.5, θ = 1, then validate it from stdin
  multiiso canonical 2 --c 0.5 --theta 1 | multiiso validate -

  # acceptance sweep summary
  multiiso sweep pivotal --trials 100 --seed 3

Exit codes: 0 pass, 1 checked failure (the mathematics says no), 2 input error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable

from multi_isometry.classify import (
    Canonical2,
    Canonical3,
    BlaschkeProduct,
    canonical2_build,
    canonical2_extract,
    canonical3_build,
    model_from_blaschke,
    normality_obstruction,
    purity_and_multiplicity,
)
from multi_isometry.cli.instance import (
    Instance,
    dump_instance,
    dumps,
    encode_matrix,
    encode_subspace,
    instance_to_dict,
    make_report,
    parse_instance,
    parse_matrix,
)
from multi_isometry.errors import (
    ClassificationError,
    CompositionError,
    ConfigurationError,
    DimensionError,
    HypothesisError,
    InstanceError,
    MultiIsometryError,
    PreconditionError,
)
from multi_isometry.model import (
    EQUIVALENT,
    ModelTuple,
    complete_tuple,
    compose,
    doubly_commuting_tuple,
    equivalent,
    validate_model,
)
from multi_isometry.numcore import Subspace, span, subspace_contains
from multi_isometry.pivotal import (
    SEED_P1,
    SEED_P2,
    build_3isometry,
    check_p2_conditions,
    exists_p2,
    p2_lattice,
    pivotal_data,
    w_isometry,
)
from multi_isometry.research import SWEEPS, summarize
from multi_isometry.structure import (
    ModelTriple,
    contraction_parts,
    extract_TZ,
    is_c_dot_zero,
    nonet_extract,
    wold_reduction_check,
)
from multi_isometry.util import DEFAULT_SEED, DEFAULT_TRUNCATION, Tolerances, fro

logger = logging.getLogger("multi_isometry.cli")

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT = 2

STDIN = "-"


# ----------------------------
# Shared plumbing
# ----------------------------


class _Context:
    """Per-invocation settings: tolerances (flags over file over env), window, seed."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.base = Tolerances.default()
        self.flag_tolerances = {"tol_eq": args.tol_eq, "tol_rank": args.tol_rank}
        self.seed = args.seed
        self.trunc = args.trunc

    def tolerances(self, inst: Instance | None = None) -> Tolerances:
        tol = self.base if inst is None else inst.apply_tolerances(self.base)
        return tol.replace(**self.flag_tolerances)

    @property
    def window(self) -> int:
        return DEFAULT_TRUNCATION if self.trunc is None else self.trunc


def _read(source: str) -> str:
    if source == STDIN:
        return sys.stdin.read()
    try:
        return Path(source).read_text(encoding="utf-8")
    except OSError as e:
        raise InstanceError(f"cannot read {source}: {e.strerror}") from e


def load_instance(source: str) -> Instance:
    return parse_instance(_read(source), source)


def _exit_code_for(error: Exception) -> int:
    # checked failures first: these subclass PreconditionError
    if isinstance(error, (CompositionError, HypothesisError, ClassificationError)):
        return EXIT_FAIL
    if isinstance(error, (InstanceError, ConfigurationError, DimensionError, PreconditionError)):
        return EXIT_INPUT
    if isinstance(error, MultiIsometryError):
        return EXIT_FAIL
    return EXIT_INPUT


def _error_report(command: str, source: str, error: Exception) -> dict:
    residuals = {}
    if isinstance(error, (CompositionError, HypothesisError)):
        residuals["violation"] = error.residual
    residuals.update(getattr(error, "residuals", {}) or {})
    return make_report(command, source, False, residuals, notes=[f"{type(error).__name__}: {error}"])


def _run_one(command: str, handler: Callable[[_Context, str], dict], ctx: _Context, source: str) -> tuple[dict, int]:
    try:
        report = handler(ctx, source)
    except (MultiIsometryError, TypeError, ValueError) as e:
        code = _exit_code_for(e)
        logger.log(logging.ERROR if code == EXIT_INPUT else logging.INFO, "%s %s: %s", command, source, e)
        return _error_report(command, source, e), code
    return report, EXIT_PASS if report["pass"] else EXIT_FAIL


def _emit(ctx: _Context, command: str, source: str, doc: Any) -> None:
    text = dumps(doc, pretty=ctx.args.pretty)
    out_dir = ctx.args.out_dir
    if out_dir is None:
        sys.stdout.write(text + "\n")
        return
    stem = "stdin" if source == STDIN else Path(source).stem
    path = Path(out_dir) / f"{stem}.{command}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text + "\n", encoding="utf-8")
    logger.info("wrote %s", path)


def _batch(ctx: _Context, command: str, handler: Callable[[_Context, str], dict], sources: list[str]) -> int:
    """Run handler over every input (concurrently with --jobs), emit in input order, return max exit code."""
    jobs = max(1, ctx.args.jobs)
    if jobs == 1 or len(sources) == 1:
        results = [_run_one(command, handler, ctx, s) for s in sources]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda s: _run_one(command, handler, ctx, s), sources))
    for source, (report, _) in zip(sources, results):
        _emit(ctx, command, source, report)
    return max(code for _, code in results)


def _tuple_of(inst: Instance, tol: Tolerances) -> ModelTuple:
    return ModelTuple.from_pairs(inst.pairs, tol)


def _need_pairs(inst: Instance, count: int, command: str) -> None:
    if inst.n < count:
        raise InstanceError(f"{command} needs at least {count} pairs, got {inst.n}", "$.tuple")


def _max(values) -> float:
    values = list(values)
    return max(values) if values else 0.0


# ----------------------------
# Commands on instance files
# ----------------------------


def cmd_validate(ctx: _Context, source: str) -> dict:
    inst = load_instance(source)
    tol = ctx.tolerances(inst)
    t = _tuple_of(inst, tol)
    report = validate_model(t, tol)
    artifacts = {"doubly_commuting": doubly_commuting_tuple(t, tol)}
    notes = [f"condition ({k}) fails" for k, ok in report.passed.items() if not ok]
    return make_report("validate", source, report.overall, report.residuals, artifacts, notes)


def cmd_compose(ctx: _Context, source: str) -> dict:
    """V_{U_1,P_1}V_{U_2,P_2} = V_{U,P}; the composed pair replaces the first two."""
    inst = load_instance(source)
    tol = ctx.tolerances(inst)
    _need_pairs(inst, 2, "compose")
    t = _tuple_of(inst, tol)
    (U_1, P_1), (U_2, P_2) = t.pairs[:2]
    U, P = compose(U_1, P_1, U_2, P_2, tol)
    out = Instance(inst.dim, inst.n - 1, ((U, P),) + t.pairs[2:], inst.params, inst.tolerances)
    residuals = {"overlap": fro(P_1 @ U_2 @ P_2)}
    return make_report("compose", source, True, residuals, {"instance": instance_to_dict(out)})


def cmd_complete(ctx: _Context, source: str) -> dict:
    inst = load_instance(source)
    tol = ctx.tolerances(inst)
    completed = complete_tuple(inst.pairs, tol)
    report = validate_model(completed, tol)
    out = Instance(completed.dim_E, completed.n, completed.pairs, inst.params, inst.tolerances)
    return make_report("complete", source, report.overall, report.residuals, {"instance": instance_to_dict(out)})


def _p2_inputs(inst: Instance, tol: Tolerances):
    _need_pairs(inst, 2, "pivotal")
    t = _tuple_of(inst, tol)
    (U_1, P_1), (U_2, P_2) = t.pairs[:2]
    return U_1, U_2, P_1, P_2


def cmd_pivotal(ctx: _Context, source: str) -> dict:
    """T_1, q_min, q_max and whether a P_2 exists; the lattice when it can be enumerated.

    params.seed selects the q_min seed: "p1" (default) or "p2" (uses P of pair 2).
    """
    inst = load_instance(source)
    tol = ctx.tolerances(inst)
    U_1, U_2, P_1, P_2 = _p2_inputs(inst, tol)
    seed = inst.params.get("seed", SEED_P1)
    if seed not in (SEED_P1, SEED_P2):
        raise InstanceError(f"seed must be {SEED_P1!r} or {SEED_P2!r}", "$.params.seed")
    seeded = {"seed": seed, "P_2": P_2}
    data = pivotal_data(U_1, U_2, P_1, tol, **seeded)
    decision = exists_p2(U_1, U_2, P_1, tol, **seeded)
    artifacts: dict[str, Any] = {
        "T_1": encode_matrix(data.T_1),
        "q_min": encode_subspace(data.lift(data.q_min)),
        "q_max": encode_subspace(data.lift(data.q_max)),
        "exists_p2": decision.exists,
        "seed": seed,
    }
    residuals: dict[str, float] = {}
    notes: list[str] = []
    if not decision.exists:
        artifacts["witness"] = encode_matrix(decision.witness.reshape(-1, 1))
        notes.append("q_min is not contained in q_max")
    else:
        products = check_p2_conditions(U_1, U_2, P_1, P_2, tol).vanishing_products
        residuals["vanishing_products"] = _max(products)
        residuals["W_unitary"] = w_isometry(U_1, U_2, P_1, tol, **seeded).unitary_residual
        lattice = p2_lattice(U_1, U_2, P_1, tol, **seeded)
        if lattice.enumerable:
            artifacts["lattice"] = [encode_subspace(data.lift(Q)) for Q in lattice.subspaces]
            artifacts["lattice_closed"] = lattice.closed
        else:
            notes.append(f"lattice not enumerated: {lattice.reason}")
    passed = decision.exists and all(v <= tol.tol_eq for v in residuals.values())
    return make_report("pivotal", source, passed, residuals, artifacts, notes)


def _choose_q(inst: Instance, data, tol: Tolerances) -> Subspace:
    choice = inst.params.get("Q1", "min")
    if choice == "min":
        return data.q_min
    if choice == "max":
        return data.q_max
    if isinstance(choice, list):
        Q = span(parse_matrix(choice, "$.params.Q1", rows=inst.dim), tol)
        if not subspace_contains(Q, data.frame, tol):
            raise InstanceError("Q1 must lie in the range of I − P_1", "$.params.Q1")
        return data.lower(Q)
    raise InstanceError('Q1 must be "min", "max" or a basis matrix in E coordinates', "$.params.Q1")


def cmd_build3(ctx: _Context, source: str) -> dict:
    """3-isometry from (U_1, P_1), U_2 and a choice of Q_1 (params.Q1)."""
    inst = load_instance(source)
    tol = ctx.tolerances(inst)
    U_1, U_2, P_1, _ = _p2_inputs(inst, tol)
    data = pivotal_data(U_1, U_2, P_1, tol)
    if not data.admits_p2:
        return make_report("build3", source, False, notes=["no P_2 exists: q_min is not contained in q_max"])
    built = build_3isometry(U_1, U_2, P_1, _choose_q(inst, data, tol), tol)
    report = validate_model(built, tol)
    params = {k: v for k, v in inst.params.items() if k != "Q1"}
    out = Instance(built.dim_E, built.n, built.pairs, params, inst.tolerances)
    return make_report("build3", source, report.overall, report.residuals, {"instance": instance_to_dict(out)})


def cmd_structure(ctx: _Context, source: str) -> dict:
    """(T, Z), the nonet of Z, the unitary / cnu split of T and the reduction check."""
    inst = load_instance(source)
    tol = ctx.tolerances(inst)
    t = _tuple_of(inst, tol)
    triple = ModelTriple.from_two_tuple(t, tol) if t.n == 2 else ModelTriple.from_matrices(*t.pairs[0], tol)
    ext = extract_TZ(triple, tol)
    parts = contraction_parts(ext.T, tol)
    nonet = nonet_extract(ext.Z, ext.Fp_dim, ext.T, tol)
    wold = wold_reduction_check(triple, ctx.window, tol)

    residuals = {f"TZ_{k}": v for k, v in ext.residuals.items()}
    residuals.update({f"nonet_{k}": v for k, v in nonet.check(tol).items()})
    residuals.update({f"wold_{k}": v for k, v in wold.residuals.items()})
    residuals["reducing"] = parts.reducing_residual(ext.T)
    artifacts = {
        "T": encode_matrix(ext.T),
        "Z": encode_matrix(ext.Z),
        "dims": {"F": ext.F_dim, "F_prime": ext.Fp_dim, "unitary": parts.unitary_space.dim, "cnu": parts.cnu_space.dim},
        "R_dim": nonet.R.dim,
        "c_dot_zero": is_c_dot_zero(parts.T_cnu, tol),
    }
    return make_report("structure", source, wold.passed(tol), residuals, artifacts, list(wold.notes))


def cmd_classify(ctx: _Context, source: str) -> dict:
    inst = load_instance(source)
    tol = ctx.tolerances(inst)
    t = _tuple_of(inst, tol)
    report = validate_model(t, tol)
    if not report:
        raise ClassificationError(f"tuple fails validation: {report.residuals}")
    mult = purity_and_multiplicity(t, ctx.window, tol)
    artifacts: dict[str, Any] = {
        "irreducible": mult.irreducible,
        "proper": mult.proper,
        "multiplicities": mult.multiplicities,
        "product_multiplicity": mult.product_multiplicity,
        "pure": mult.pure,
        "product_unitary_part_dim": mult.product_unitary_part_dim,
        "lower_bound_holds": mult.lower_bound_holds,
        "multiplicity_one_holds": mult.multiplicity_one_holds,
        "multiplicity_one_index": mult.multiplicity_one_index,
    }
    notes: list[str] = []
    residuals = dict(report.residuals)
    if t.n == 2 and t.dim_E == 2 and mult.irreducible:
        p = canonical2_extract(t, tol)
        artifacts["canonical2"] = {"c": p.c, "theta": p.theta}
    elif t.n == 3 and t.dim_E == 3:
        U_1, P_1 = t.pairs[0]
        U_2, P_2 = t.pairs[1]
        try:
            obs = normality_obstruction(U_1, U_2, P_1, P_2, tol)
        except PreconditionError as e:
            notes.append(str(e))
        else:
            residuals["N"] = fro(obs.N)
            artifacts["scalars"] = obs.scalars
            artifacts["irreducibility_consistent"] = obs.irreducibility_consistent
    return make_report("classify", source, mult.consistent, residuals, artifacts, notes)


def cmd_equiv(ctx: _Context, first: str, second: str) -> tuple[dict, int]:
    source = f"{first} {second}"
    try:
        a, b = load_instance(first), load_instance(second)
        tol_a, tol_b = ctx.tolerances(a), ctx.tolerances(b)
        tol = tol_a.looser(tol_b)
        result = equivalent(_tuple_of(a, tol_a), _tuple_of(b, tol_b), tol, seed=ctx.seed)
    except (MultiIsometryError, TypeError, ValueError) as e:
        return _error_report("equiv", source, e), _exit_code_for(e)
    artifacts: dict[str, Any] = {"status": result.status}
    if result.intertwiner is not None:
        artifacts["intertwiner"] = encode_matrix(result.intertwiner)
    residuals = {} if result.residual is None else {"intertwining": result.residual}
    passed = result.status == EQUIVALENT
    return make_report("equiv", source, passed, residuals, artifacts, [result.reason]), EXIT_PASS if passed else EXIT_FAIL


# ----------------------------
# Builders (emit instance files)
# ----------------------------


def _emit_instance(ctx: _Context, inst: Instance) -> None:
    text = dump_instance(inst, pretty=ctx.args.pretty)
    if ctx.args.output:
        Path(ctx.args.output).write_text(text + "\n", encoding="utf-8")
        logger.info("wrote %s", ctx.args.output)
    else:
        sys.stdout.write(text + "\n")


def cmd_canonical(ctx: _Context) -> Instance:
    a = ctx.args
    tol = ctx.tolerances()
    if a.kind == 2:
        p = Canonical2(a.c, a.theta)
        t = canonical2_build(p, tol)
        params = {"c": p.c, "theta": p.theta}
    else:
        p3 = Canonical3(a.alpha, a.alpha1, a.theta, a.theta1)
        t = canonical3_build(p3, tol).model
        params = {"alpha": p3.alpha, "alpha1": p3.alpha1, "theta": p3.theta, "theta1": p3.theta1}
    return Instance.from_model(t, {k: [v.real, v.imag] for k, v in params.items()})


def _zeros(text: str) -> tuple[complex, ...]:
    try:
        return tuple(complex(z.strip()) for z in text.split(",") if z.strip())
    except ValueError as e:
        raise ConfigurationError(f"bad zero list {text!r}: {e}") from e


def cmd_blaschke(ctx: _Context) -> Instance:
    phis = [BlaschkeProduct(_zeros(text)) for text in ctx.args.phi]
    built = model_from_blaschke(phis, ctx.trunc, ctx.tolerances())
    logger.info("blaschke model: window %d, tol_model %.3e", built.window, built.tol_model)
    params = {"zeros": [[[z.real, z.imag] for z in phi.zeros] for phi in phis], "window": built.window}
    return Instance.from_model(built.model, params)


def cmd_sweep(ctx: _Context) -> dict:
    df = SWEEPS[ctx.args.name](trials=ctx.args.trials, seed=ctx.seed, tol=ctx.tolerances())
    summary = summarize(df)
    residuals = {col: row["value"] for col, row in summary.iterrows() if row["statistic"] == "max"}
    rates = {col: row["value"] for col, row in summary.iterrows() if row["statistic"] == "rate"}
    passed = bool(df["passed"].all()) if "passed" in df else False
    notes = []
    if "error" in df:
        notes = sorted(set(df["error"].dropna()))
    if ctx.args.out_dir:
        path = Path(ctx.args.out_dir) / f"sweep_{ctx.args.name}.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(path)
        logger.info("wrote %s", path)
    return make_report("sweep", ctx.args.name, passed, residuals, {"rates": rates, "trials": len(df)}, notes)


# ----------------------------
# Parser
# ----------------------------


def _global_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-eq", type=float, default=None, help="Matrix equality tolerance (default 1e-9 or $MULTIISO_TOL).")
    common.add_argument("--tol-rank", type=float, default=None, help="Relative singular-value cutoff (default 1e-10).")
    common.add_argument("--trunc", type=int, default=None, help=f"Truncation window N (default {DEFAULT_TRUNCATION}).")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Seed for randomized sub-procedures.")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="pretty", action="store_false", help="One-line JSON output (default).")
    fmt.add_argument("--pretty", dest="pretty", action="store_true", help="Indented JSON output.")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG on stderr.")
    common.add_argument("--jobs", type=int, default=1, help="Instance files processed concurrently.")
    common.add_argument("--out-dir", default=None, help="Write one report per input file here instead of stdout.")
    common.set_defaults(pretty=False)
    return common


def create_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(
        prog="multiiso",
        description="Construct, validate and classify model multi-isometries.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    batch_help = {
        "validate": "Check conditions (a)-(d).",
        "pivotal": "T_1, q_min, q_max and existence of P_2.",
        "structure": "(T, Z), nonet, unitary/cnu split and the reduction check.",
        "classify": "Irreducibility, multiplicities and canonical parameters.",
    }
    for name, text in batch_help.items():
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("files", nargs="+", help="Instance files ('-' for stdin).")

    for name, text in (
        ("compose", "Compose the first two pairs."),
        ("complete", "Append the completing pair."),
        ("build3", "Build a 3-isometry from Q_1 = params.Q1 ('min', 'max' or a basis)."),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("files", nargs="+", help="Instance files ('-' for stdin).")

    p = sub.add_parser("equiv", parents=[common], help="Unitary equivalence of two instances.")
    p.add_argument("first")
    p.add_argument("second")

    p = sub.add_parser("canonical", parents=[common], help="Emit a canonical n = 2 or n = 3 instance.")
    p.add_argument("kind", type=int, choices=[2, 3])
    p.add_argument("--c", type=complex, default=0j)
    p.add_argument("--theta", type=complex, default=1 + 0j)
    p.add_argument("--alpha", type=complex, default=0j)
    p.add_argument("--alpha1", type=complex, default=0j)
    p.add_argument("--theta1", type=complex, default=1 + 0j)
    p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("blaschke", parents=[common], help="Model tuple of (S, φ_2(S), ..., φ_n(S)).")
    p.add_argument("--phi", action="append", required=True, help="Comma-separated zeros of one Blaschke factor.")
    p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("sweep", parents=[common], help="Run a seeded acceptance sweep and summarize it.")
    p.add_argument("name", choices=sorted(SWEEPS))
    p.add_argument("--trials", type=int, default=100)
    return parser


BATCH_COMMANDS: dict[str, Callable[[_Context, str], dict]] = {
    "validate": cmd_validate,
    "compose": cmd_compose,
    "complete": cmd_complete,
    "pivotal": cmd_pivotal,
    "build3": cmd_build3,
    "structure": cmd_structure,
    "classify": cmd_classify,
}


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    args = create_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        ctx = _Context(args)
        ctx.tolerances()
    except (ConfigurationError, ValueError) as e:
        logger.error("%s", e)
        return EXIT_INPUT

    if args.command in BATCH_COMMANDS:
        return _batch(ctx, args.command, BATCH_COMMANDS[args.command], args.files)

    if args.command == "equiv":
        report, code = cmd_equiv(ctx, args.first, args.second)
        _emit(ctx, "equiv", "equiv", report)
        return code

    if args.command == "sweep":
        report, code = _run_one("sweep", lambda c, _: cmd_sweep(c), ctx, args.name)
        _emit(ctx, "sweep", args.name, report)
        return code

    builder = cmd_canonical if args.command == "canonical" else cmd_blaschke
    try:
        inst = builder(ctx)
    except (MultiIsometryError, ValueError) as e:
        code = _exit_code_for(e)
        logger.error("%s: %s", args.command, e)
        return code
    _emit_instance(ctx, inst)
    return EXIT_PASS


if __name__ == "__main__":
    raise SystemExit(main())
