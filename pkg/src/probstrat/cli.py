"""Command-line workflows over CSV and JSON files.

Subcommands: simulate, train, predict, evaluate, experiment,
check-surrogate.  Exit codes: 0 success, 1 usage/configuration error,
2 data error, 3 numeric error.  Floats are serialized with repr, so
train -> predict round trips and repeated experiment runs are
byte-identical.
"""

import argparse
import csv
import json
import os
import re
import sys

import numpy as np

from .bands import Boundaries
from .data import DataError, read_dataset_csv, write_dataset_csv
from .experiment import (
    ExperimentConfig,
    evaluate_model,
    run_replications,
    summary_table,
    tune_lambda,
    tune_lambda_cv,
    write_results_csv,
    write_summary_json,
)
from .simulate import SETTINGS, STREAM_OF_ROLE, generate_setting, make_rng, random_rotation
from .solver import (
    NumericError,
    SolverConfig,
    TrainedModel,
    fit_logistic,
    fit_piecewise,
    load_model,
    logistic_objective,
    objective,
    predict_intervals,
    predict_margin,
    save_model,
)
from .surrogate import check_consistency, logistic_surrogate, risk_constant, save_spec

_GRID_RE = re.compile(r"^2\^(-?\d+)\.\.2\^(-?\d+)$")


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_pi(text: str) -> Boundaries:
    try:
        values = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise ValueError(f"--pi must be a comma-separated list of probabilities, got {text!r}")
    return Boundaries(values)


def _parse_grid(text: str) -> tuple[float, ...]:
    m = _GRID_RE.match(text.strip())
    if not m:
        raise ValueError(f"--grid must look like 2^-15..2^10, got {text!r}")
    lo, hi = int(m.group(1)), int(m.group(2))
    if hi < lo:
        raise ValueError(f"--grid exponent range is empty: {text!r}")
    return tuple(2.0 ** e for e in range(lo, hi + 1))


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        max_iterations=args.max_iterations,
        rel_tolerance=args.rel_tolerance,
        check_interval=args.check_interval,
        averaging=not args.no_averaging,
    )


def _add_solver_flags(sub):
    sub.add_argument("--max-iterations", type=int, default=SolverConfig.max_iterations)
    sub.add_argument("--rel-tolerance", type=float, default=SolverConfig.rel_tolerance)
    sub.add_argument("--check-interval", type=int, default=SolverConfig.check_interval)
    sub.add_argument("--no-averaging", action="store_true", help="report the last iterate instead of the average")


def cmd_simulate(args) -> int:
    role = args.role
    rng = make_rng(args.seed, args.replication, STREAM_OF_ROLE[role])
    rotation = None
    if not args.no_rotation:
        rotation = random_rotation(args.p, make_rng(args.seed, args.replication, STREAM_OF_ROLE["rotation"]))
    sample = generate_setting(args.setting, args.n, args.p, rng, rotation=rotation)
    write_dataset_csv(args.out, sample)
    print(f"wrote {sample.n} rows x {sample.p} features to {args.out}")
    return 0


def cmd_train(args) -> int:
    if (args.lam is None) == (args.grid is None):
        raise ValueError("exactly one of --lambda or --grid is required")
    if args.grid is not None and args.tune is None and args.cv is None:
        raise ValueError("--grid needs either --tune CSV or --cv N")
    if args.tune is not None and args.cv is not None:
        raise ValueError("--tune and --cv are mutually exclusive")
    if args.lam is not None and args.lam <= 0.0:
        raise ValueError("--lambda must be positive")

    boundaries = _parse_pi(args.pi)
    config = _solver_config(args)
    train = read_dataset_csv(args.data)
    spec = logistic_surrogate(boundaries)
    chosen = None

    if args.lam is not None:
        lam = args.lam
        if args.loss == "piecewise":
            model = fit_piecewise(train, spec, lam, config)
        else:
            model = fit_logistic(train, lam, config)
    else:
        grid = _parse_grid(args.grid)
        if args.tune is not None:
            tune = read_dataset_csv(args.tune)
            lam, model = tune_lambda(train, tune, boundaries, spec, grid, args.loss, config)
        else:
            lam, model = tune_lambda_cv(train, boundaries, spec, grid, args.loss, args.cv, config)
        chosen = lam

    if args.loss == "piecewise":
        obj = objective(train, model, spec, lam)
        thresholds = spec.thresholds
    else:
        obj = logistic_objective(train, model, lam)
        pi = boundaries.values
        thresholds = np.log(pi / (1.0 - pi))

    tm = TrainedModel(model=model, boundaries=boundaries, thresholds=thresholds, loss=args.loss, lam=lam)
    save_model(args.out, tm)
    if chosen is not None:
        print(f"lambda: {chosen!r}")
    print(f"objective: {obj!r}")
    print(f"wrote model to {args.out}")
    return 0


def cmd_predict(args) -> int:
    tm = load_model(args.model)
    data = read_dataset_csv(args.data, require_labels=False)
    if data.n and data.p != tm.model.p:
        raise DataError(f"{args.data}: {data.p} features, model expects {tm.model.p}")
    f = predict_margin(tm.model, data.features) if data.n else np.empty(0)
    k = predict_intervals(tm, data.features) if data.n else np.empty(0, dtype=int)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["f", "interval_index", "interval_lo", "interval_hi"])
        for i in range(data.n):
            lo, hi = tm.boundaries.interval_bounds(int(k[i]))
            writer.writerow([repr(float(f[i])), int(k[i]), repr(lo), repr(hi)])
    print(f"wrote {data.n} predictions to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    tm = load_model(args.model)
    data = read_dataset_csv(args.data)
    if data.p != tm.model.p:
        raise DataError(f"{args.data}: {data.p} features, model expects {tm.model.p}")
    spec = logistic_surrogate(tm.boundaries) if tm.loss == "piecewise" else None
    loss = evaluate_model(tm.model, data, tm.boundaries, spec, tm.loss)
    print(f"mean stepwise loss: {loss!r}")
    return 0


def _experiment_config(doc: dict) -> ExperimentConfig:
    problems = []
    known = {
        "setting", "dims", "n_train", "n_tune", "n_test", "replications",
        "lambda_grid", "boundaries", "master_seed", "solver",
    }
    for key in doc:
        if key not in known:
            problems.append(f"unknown field {key!r}")
    setting = doc.get("setting")
    if setting is None or str(setting) not in SETTINGS:
        problems.append(f"setting must be one of {sorted(SETTINGS)}, got {setting!r}")
    grid = doc.get("lambda_grid", "2^-15..2^10")
    if isinstance(grid, str):
        try:
            grid = _parse_grid(grid)
        except ValueError as exc:
            problems.append(f"lambda_grid: {exc}")
            grid = (1.0,)
    solver_doc = doc.get("solver", {})
    if not isinstance(solver_doc, dict):
        problems.append("solver must be an object")
        solver_doc = {}
    if problems:
        raise ValueError("invalid experiment config: " + "; ".join(problems))
    try:
        solver = SolverConfig(**solver_doc)
        return ExperimentConfig(
            setting=str(setting),
            dims=tuple(doc.get("dims", (2,))),
            n_train=int(doc.get("n_train", 100)),
            n_tune=int(doc.get("n_tune", 100)),
            n_test=int(doc.get("n_test", 10_000)),
            replications=int(doc.get("replications", 100)),
            lambda_grid=tuple(grid),
            boundaries=doc.get("boundaries"),
            master_seed=int(doc.get("master_seed", 0)),
            solver=solver,
        )
    except (TypeError, ValueError) as exc:
        raise ValueError(f"invalid experiment config: {exc}") from None


def cmd_experiment(args) -> int:
    with open(args.config) as fh:
        doc = json.load(fh)
    config = _experiment_config(doc)
    result = run_replications(config)
    os.makedirs(args.out_dir, exist_ok=True)
    write_results_csv(os.path.join(args.out_dir, "results.csv"), result)
    write_summary_json(os.path.join(args.out_dir, "summary.json"), result)
    print(summary_table(result))
    return 0


def cmd_check_surrogate(args) -> int:
    boundaries = _parse_pi(args.pi)
    spec = logistic_surrogate(boundaries)
    report = check_consistency(spec)
    print(f"thresholds: {boundaries.values.tolist()}")
    print(f"C1 (slope order):   {'ok' if report.c1_ok else 'VIOLATED'}")
    print(f"C2 (kink alignment): {'ok' if report.c2_ok else 'VIOLATED'}")
    print(f"C3 (slope ratio):    {'ok' if report.c3_ok else 'VIOLATED'}")
    print(f"max |slope-ratio residual|: {float(np.max(np.abs(report.eq8_residuals))):.3e}")
    if report.ok:
        print(f"excess-risk constant: {risk_constant(spec)!r}")
    if args.out:
        save_spec(args.out, spec)
        print(f"wrote surrogate to {args.out}")
    return 0 if report.ok else 2


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="probstrat", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="draw a benchmark dataset to CSV")
    p.add_argument("--setting", required=True, choices=sorted(SETTINGS))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--replication", type=int, default=0)
    p.add_argument("--role", choices=("train", "tune", "test"), default="train",
                   help="seed substream; matches the experiment harness")
    p.add_argument("--no-rotation", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="fit a model on a CSV dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--pi", required=True, help="comma-separated probability thresholds")
    p.add_argument("--loss", required=True, choices=("piecewise", "logistic"))
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--grid", default=None, help="penalty grid like 2^-15..2^10")
    p.add_argument("--tune", default=None, help="tuning-set CSV (with --grid)")
    p.add_argument("--cv", type=int, default=None, help="k-fold CV instead of a tuning set")
    p.add_argument("--out", required=True)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="margins and band predictions for a CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="mean stepwise loss of a model on labeled CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("experiment", help="run a replication study from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("check-surrogate", help="verify the alignment conditions for thresholds")
    p.add_argument("--pi", required=True)
    p.add_argument("--out", default=None, help="optionally write the surrogate JSON")
    p.set_defaults(func=cmd_check_surrogate)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return int(args.func(args) or 0)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
