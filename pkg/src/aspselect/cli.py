"""Command-line entry point.

One binary, subcommand style: ground-stats, split, train, select, run,
evaluate.  Flags override environment variables (ASPSELECT_MODEL,
ASPSELECT_POOL, ASPSELECT_TIME_LIMIT, ASPSELECT_MEM_LIMIT), which in turn
override built-in defaults.  Exit codes: 0 success, 1 domain error
(parse/model/config), 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import shlex
import sys
from pathlib import Path

from . import classifiers, dataset, harness, runner, selector
from .features import extract_features
from .groundfmt import GroundFormatError, parse_ground_program
from .selector import ConfigError
from .strat import NoAnswerSetError


class DomainError(Exception):
    """Anything that should exit 1 with a one-line message."""


def _env(name: str, default=None):
    return os.environ.get(f"ASPSELECT_{name}", default)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aspselect",
        description="Portfolio ASP pipeline: ground-program features, "
                    "per-instance solver selection, supervised runs and "
                    "offline evaluation.")
    parser.add_argument("--seed", type=int, default=0,
                        help="global random seed (default 0)")
    parser.add_argument("--format", choices=("plain", "records"),
                        default="plain",
                        help="output style: human text or one machine-readable "
                             "line (default plain)")
    parser.add_argument("--verbose", action="store_true",
                        help="extra progress output on stderr")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("ground-stats",
                       help="print the feature vector and raw counts of a "
                            "numeric ground program")
    p.add_argument("program", help="ground program file ('-' for stdin)")

    p = sub.add_parser("split",
                       help="label instances and emit the 50/25/25 stratified "
                            "train/valid/test split")
    p.add_argument("--records", required=True, help="runtime records CSV")
    p.add_argument("--features", required=True, help="per-instance features CSV")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--solvers", default=None,
                   help="comma-separated solver priority for tie-breaking "
                        "(default: clasp*,wasp*)")

    p = sub.add_parser("train", help="train a selection model")
    p.add_argument("--train", required=True, help="train split CSV")
    p.add_argument("--valid", required=True, help="validation split CSV")
    p.add_argument("--test", default=None, help="test split CSV (prints report)")
    p.add_argument("--classifier", choices=("svm", "forest"), default="svm")
    p.add_argument("--out", required=True, help="model output file")

    p = sub.add_parser("select",
                       help="pick a solver (or answer a solver-free program)")
    p.add_argument("program", nargs="?", default="-",
                   help="ground program file (default stdin)")
    p.add_argument("--model", default=_env("MODEL"), help="trained model file")
    p.add_argument("--pool", default=_env("POOL"),
                   help="solver pool JSON (default: built-in clasp*/wasp* pool)")
    p.add_argument("--explain", action="store_true",
                   help="also print classification, features and elapsed time")

    p = sub.add_parser("run",
                       help="ground, select and solve one instance under limits")
    p.add_argument("--program", required=True, help="input program file")
    p.add_argument("--grounder-cmd", required=True,
                   help="grounder command line (program file is appended)")
    p.add_argument("--model", default=_env("MODEL"), help="trained model file")
    p.add_argument("--pool", default=_env("POOL"), help="solver pool JSON")
    p.add_argument("--time-limit", type=float,
                   default=float(_env("TIME_LIMIT", runner.DEFAULT_TIME_LIMIT)))
    p.add_argument("--mem-limit", type=int,
                   default=int(_env("MEM_LIMIT", runner.DEFAULT_MEM_LIMIT)))
    p.add_argument("--explain", action="store_true")

    p = sub.add_parser("evaluate",
                       help="score recorded runs: virtual best, single best "
                            "and (optionally) the learned selector")
    p.add_argument("--records", required=True, help="runtime records CSV")
    p.add_argument("--domains", default=None,
                   help="CSV mapping instanceId to domain")
    p.add_argument("--model", default=None,
                   help="model file; enables the selector policy")
    p.add_argument("--features", default=None,
                   help="per-instance features CSV (needed with --model)")
    p.add_argument("--out", default=None,
                   help="directory for report.txt and cactus .dat files")
    return parser


def _read_program(path: str):
    try:
        if path == "-":
            return parse_ground_program(sys.stdin.read())
        with open(path, "rb") as fh:
            return parse_ground_program(fh)
    except FileNotFoundError:
        raise DomainError(f"no such file: {path}") from None
    except GroundFormatError as exc:
        raise DomainError(f"{path}: {exc}") from None


def _load_model(path: str | None):
    if not path:
        raise DomainError("a --model file is required")
    try:
        return classifiers.load_model(path)
    except classifiers.ModelFormatError as exc:
        raise DomainError(str(exc)) from None


def _load_pool(path: str | None):
    return selector.load_pool(path) if path else selector.default_pool()


def _emit_record(pairs: list[tuple[str, object]], fmt: str) -> None:
    if fmt == "records":
        print(" ".join(f"{k}={v}" for k, v in pairs))
    else:
        width = max(len(k) for k, _ in pairs)
        for k, v in pairs:
            print(f"{k.ljust(width)}  {v}")


def _cmd_ground_stats(args) -> int:
    program = _read_program(args.program)
    fv = extract_features(program)
    _emit_record(list(fv.as_record().items()), args.format)
    return 0


def _cmd_split(args) -> int:
    records = dataset.read_records(args.records)
    features = dataset.read_features(args.features)
    order = (args.solvers.split(",") if args.solvers
             else [s.solver_id for s in selector.default_pool()])
    result = dataset.label_instances(records, features, order)
    if not result.instances:
        raise DomainError("no labeled instances: nothing was solved")
    if args.verbose and result.unsolved:
        print(f"dropped {len(result.unsolved)} unsolved instance(s)",
              file=sys.stderr)
    if args.verbose and result.missing_records:
        print(f"skipped {len(result.missing_records)} instance(s) with "
              "features but no records", file=sys.stderr)
    split = dataset.stratified_split(result.instances, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dataset.write_labeled(out / "train.csv", split.train)
    dataset.write_labeled(out / "valid.csv", split.valid)
    dataset.write_labeled(out / "test.csv", split.test)
    _emit_record([("train", len(split.train)), ("valid", len(split.valid)),
                  ("test", len(split.test)),
                  ("dropped_unsolved", len(result.unsolved))], args.format)
    return 0


def _cmd_train(args) -> int:
    train = dataset.read_labeled(args.train)
    valid = dataset.read_labeled(args.valid)
    try:
        if args.classifier == "svm":
            scaler, model = classifiers.train_svm(train, valid)
        else:
            scaler, model = classifiers.train_forest(train, valid,
                                                     seed=args.seed)
    except classifiers.TrainingError as exc:
        raise DomainError(str(exc)) from None
    classifiers.save_model(args.out, scaler, model)
    if args.test:
        report = classifiers.evaluate(model, scaler,
                                      dataset.read_labeled(args.test))
        if args.format == "records":
            print(f"precision={report.precision:.4f} recall={report.recall:.4f} "
                  f"f1={report.f1:.4f}")
        else:
            print("\n".join(report.lines()))
    return 0


def _cmd_select(args) -> int:
    program = _read_program(args.program)
    scaler, model = _load_model(args.model)
    pool = _load_pool(args.pool)
    try:
        decision = selector.select(program, model, scaler, pool,
                                   model_id=args.model or "")
    except NoAnswerSetError as exc:
        print(f"no-answer-set: {exc}")
        return 0
    if decision.outcome == "solver-free":
        names = sorted(program.symbols.get(a, f"_{a}")
                       for a in decision.answer_set or ())
        print("solver-free: " + " ".join(names))
    else:
        print(decision.solver_id)
    if args.explain:
        pairs = [("outcome", decision.outcome),
                 ("elapsed", f"{decision.elapsed:.6f}")]
        if decision.features is not None:
            pairs += list(decision.features.as_record().items())
        _emit_record(pairs, args.format)
    return 0


def _cmd_run(args) -> int:
    scaler, model = _load_model(args.model)
    pool = _load_pool(args.pool)
    grounder_cmd = shlex.split(args.grounder_cmd)
    grounder = selector.SolverSpec("grounder", grounder_cmd[0],
                                   tuple(grounder_cmd[1:]))
    limits = runner.ResourceLimits(args.time_limit, args.mem_limit)
    outcome = runner.run_pipeline(args.program, grounder, model, scaler,
                                  pool, limits, model_id=args.model or "")
    print(outcome.record_line())
    if args.explain and outcome.answer:
        print(outcome.answer.rstrip("\n"))
    return 0


def _read_domains(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    import csv
    with open(path, newline="") as fh:
        return {row["instanceId"]: row["domain"] for row in csv.DictReader(fh)}


def _cmd_evaluate(args) -> int:
    records = dataset.read_records(args.records)
    matrix = harness.RuntimeMatrix.from_records(records,
                                                _read_domains(args.domains))
    scores = [harness.score_virtual_best(matrix)]
    for solver_id in matrix.solvers():
        scores.append(harness.score_single_best(matrix, solver_id))
    if args.model:
        if not args.features:
            raise DomainError("--model needs --features to drive the selector")
        scaler, model = _load_model(args.model)
        feats = dataset.read_features(args.features)

        def choose(iid: str) -> str:
            if iid not in feats:
                raise DomainError(f"no stored features for instance {iid!r}")
            return classifiers.predict(model, scaler, feats[iid])

        scores.append(harness.score_selector(matrix, choose,
                                             model_id=Path(args.model).name))
    table, plots = harness.render_report(scores)
    print(table, end="")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(table)
        for policy, points in plots.items():
            safe = "".join(c if c.isalnum() else "_" for c in policy)
            lines = "".join(f"{i} {t:.6f}\n" for i, t in points)
            (out / f"cactus_{safe}.dat").write_text(lines)
    return 0


_COMMANDS = {
    "ground-stats": _cmd_ground_stats,
    "split": _cmd_split,
    "train": _cmd_train,
    "select": _cmd_select,
    "run": _cmd_run,
    "evaluate": _cmd_evaluate,
}


def dispatch(argv: list[str]) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage(sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](args)
    except (DomainError, ConfigError, ValueError, OSError) as exc:
        print(f"aspselect: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
