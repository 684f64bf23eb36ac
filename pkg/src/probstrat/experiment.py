"""Penalty tuning, stepwise-loss evaluation, and the replication harness.

One replication draws train/tune/test sets (shared rotation), fits one
model per grid penalty on the training set, picks the penalty scoring
best on the tuning set, and reports the chosen model's mean stepwise loss
on the test set.  The piecewise method is tuned by the stepwise loss
itself; the logistic baseline is tuned by its own likelihood and then
evaluated under the same stepwise loss for comparison.  Replications use
disjoint seed substreams, so runs are reproducible record-for-record
regardless of execution order or parallelism (capped by the MS_THREADS
environment variable).
"""

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .bands import Boundaries, interval_index, interval_loss_table, predict_interval
from .data import LabeledSample
from .simulate import bayes_risk, default_boundaries, replication_datasets
from .solver import LinearModel, SolverConfig, fit_logistic, fit_piecewise, predict_margin
from .surrogate import SurrogateSpec, logistic_surrogate

__all__ = [
    "ExperimentConfig",
    "ReplicationRecord",
    "MethodSummary",
    "ExperimentResult",
    "DEFAULT_GRID",
    "mean_stepwise_loss",
    "tune_lambda",
    "tune_lambda_cv",
    "evaluate_model",
    "run_replications",
    "write_results_csv",
    "write_summary_json",
    "summary_table",
]

#: Powers of two from 2^-15 up to 2^10, the default penalty grid.
DEFAULT_GRID = tuple(2.0 ** e for e in range(-15, 11))

METHODS = ("piecewise", "logistic")


@dataclass(frozen=True)
class ExperimentConfig:
    setting: str = "1.1"
    dims: tuple[int, ...] = (2,)
    n_train: int = 100
    n_tune: int = 100
    n_test: int = 10_000
    replications: int = 100
    lambda_grid: tuple[float, ...] = DEFAULT_GRID
    boundaries: tuple[float, ...] | None = None  # None: the setting's designated thresholds
    master_seed: int = 0
    solver: SolverConfig = SolverConfig()

    def __post_init__(self):
        if min(self.n_train, self.n_tune, self.n_test, self.replications) < 1:
            raise ValueError("counts must be >= 1")
        if not self.dims or any(p < 1 for p in self.dims):
            raise ValueError("dims must be a non-empty list of dimensions >= 1")
        grid = tuple(float(l) for l in self.lambda_grid)
        if not grid or any(l <= 0.0 for l in grid):
            raise ValueError("lambda grid must be non-empty and positive")
        object.__setattr__(self, "lambda_grid", grid)
        object.__setattr__(self, "dims", tuple(int(p) for p in self.dims))
        if self.boundaries is not None:
            object.__setattr__(self, "boundaries", tuple(float(v) for v in self.boundaries))

    def resolve_boundaries(self) -> Boundaries:
        if self.boundaries is None:
            return default_boundaries(self.setting)
        return Boundaries(self.boundaries)


@dataclass(frozen=True)
class ReplicationRecord:
    setting: str
    p: int
    replication: int
    method: str
    lam: float
    test_loss: float


@dataclass(frozen=True)
class MethodSummary:
    method: str
    p: int
    median: float
    se: float
    iqr: float


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    records: list[ReplicationRecord]
    summaries: list[MethodSummary]
    bayes_floor: float

    def summary_for(self, method: str, p: int) -> MethodSummary:
        for s in self.summaries:
            if s.method == method and s.p == p:
                return s
        raise KeyError(f"no summary for ({method}, p={p})")


def mean_stepwise_loss(labels: np.ndarray, intervals: np.ndarray, boundaries: Boundaries) -> float:
    """Mean stepwise loss of predicted band indices against -1/+1 labels."""
    loss_pos, loss_neg = interval_loss_table(boundaries)
    k = np.asarray(intervals)
    return float(np.mean(np.where(labels == 1, loss_pos[k], loss_neg[k])))


def _mean_nll(data: LabeledSample, model: LinearModel) -> float:
    z = data.labels * predict_margin(model, data.features)
    return float(np.mean(np.logaddexp(0.0, -z)))


def _fit(method, train, spec, lam, config):
    if method == "piecewise":
        return fit_piecewise(train, spec, lam, config)
    if method == "logistic":
        return fit_logistic(train, lam, config)
    raise ValueError(f"method must be one of {METHODS}, got {method!r}")


def _tune_score(method, model, tune, boundaries, spec):
    if method == "piecewise":
        k = predict_interval(predict_margin(model, tune.features), spec.thresholds)
        return mean_stepwise_loss(tune.labels, k, boundaries)
    return _mean_nll(tune, model)


def tune_lambda(train, tune, boundaries, spec, grid, method, config=None):
    """Pick the best grid penalty on a held-out tuning set.

    Fits one model per penalty on ``train``; piecewise candidates are
    scored by their mean stepwise loss on ``tune``, logistic candidates by
    mean negative log-likelihood.  Ties go to the smallest penalty.
    Returns ``(lam, model)`` with the model fit on ``train`` at that
    penalty.
    """
    grid = sorted(float(l) for l in grid)
    if not grid:
        raise ValueError("lambda grid must be non-empty")
    if train.p != tune.p:
        raise ValueError("train and tune dimensions disagree")
    best = None
    for lam in grid:
        model = _fit(method, train, spec, lam, config)
        score = _tune_score(method, model, tune, boundaries, spec)
        if best is None or score < best[0]:
            best = (score, lam, model)
    return best[1], best[2]


def tune_lambda_cv(train, boundaries, spec, grid, method, n_folds=2, config=None):
    """Cross-validated penalty choice (deterministic round-robin folds).

    Scores each penalty by the average held-out-fold score, picks the
    best (ties to the smallest penalty), and refits on the full training
    set.  Provided for workflows without a separate tuning set.
    """
    grid = sorted(float(l) for l in grid)
    if not grid:
        raise ValueError("lambda grid must be non-empty")
    if not 2 <= n_folds <= train.n:
        raise ValueError("n_folds must be between 2 and n")
    fold = np.arange(train.n) % n_folds
    best = None
    for lam in grid:
        scores = []
        for f in range(n_folds):
            hold = fold == f
            sub = LabeledSample(train.features[~hold], train.labels[~hold])
            val = LabeledSample(train.features[hold], train.labels[hold])
            model = _fit(method, sub, spec, lam, config)
            scores.append(_tune_score(method, model, val, boundaries, spec))
        score = float(np.mean(scores))
        if best is None or score < best[0]:
            best = (score, lam)
    lam = best[1]
    return lam, _fit(method, train, spec, lam, config)


def evaluate_model(model: LinearModel, test: LabeledSample, boundaries: Boundaries,
                   spec: SurrogateSpec | None, method: str) -> float:
    """Mean stepwise test loss of a fitted model.

    Piecewise models threshold the margin at the surrogate's prediction
    thresholds; the logistic baseline maps margins through the sigmoid and
    locates the band of the estimated probability.
    """
    if test.n < 1:
        raise ValueError("test set must be non-empty")
    f = predict_margin(model, test.features)
    if method == "piecewise":
        k = predict_interval(f, spec.thresholds)
    elif method == "logistic":
        k = interval_index(expit(f), boundaries)
    else:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    return mean_stepwise_loss(test.labels, k, boundaries)


def _run_one_replication(config: ExperimentConfig, p: int, r: int) -> list[ReplicationRecord]:
    try:
        boundaries = config.resolve_boundaries()
        spec = logistic_surrogate(boundaries)
        train, tune, test = replication_datasets(
            config.setting, p, config.n_train, config.n_tune, config.n_test,
            config.master_seed, r,
        )
        records = []
        for method in METHODS:
            lam, model = tune_lambda(
                train, tune, boundaries, spec, config.lambda_grid, method, config.solver
            )
            loss = evaluate_model(model, test, boundaries, spec, method)
            records.append(ReplicationRecord(config.setting, p, r, method, lam, loss))
        return records
    except Exception as exc:
        raise RuntimeError(
            f"replication {r} failed (setting {config.setting}, p={p}, "
            f"seed stream ({config.master_seed}, {r})): {exc}"
        ) from exc


def _worker(args):
    return _run_one_replication(*args)


def _resolve_workers(n_jobs: int) -> int:
    env = os.environ.get("MS_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, n_jobs))


def run_replications(config: ExperimentConfig, max_workers: int | None = None) -> ExperimentResult:
    """Run the full replication study described by ``config``.

    Each (dimension, replication) pair is an independent job with its own
    seed substream; jobs may run in parallel (``max_workers`` or
    MS_THREADS, default machine parallelism) without changing any record.
    """
    jobs = [(config, p, r) for p in config.dims for r in range(config.replications)]
    workers = max_workers if max_workers is not None else _resolve_workers(len(jobs))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_job = list(pool.map(_worker, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        per_job = [_run_one_replication(*job) for job in jobs]
    records = [rec for group in per_job for rec in group]

    summaries = []
    for p in config.dims:
        for method in METHODS:
            losses = np.array([
                rec.test_loss for rec in records if rec.method == method and rec.p == p
            ])
            summaries.append(MethodSummary(
                method=method,
                p=p,
                median=float(np.median(losses)),
                se=float(np.std(losses, ddof=1) / np.sqrt(losses.size)) if losses.size > 1 else 0.0,
                iqr=float(np.percentile(losses, 75) - np.percentile(losses, 25)),
            ))
    floor = bayes_risk(config.setting, config.resolve_boundaries(), method="analytic")
    return ExperimentResult(config=config, records=records, summaries=summaries, bayes_floor=floor)


def write_results_csv(path, result: ExperimentResult) -> None:
    """Per-replication records as CSV (floats via repr: reruns are byte-identical)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["setting", "p", "replication", "method", "lambda", "test_loss"])
        for rec in result.records:
            writer.writerow([
                rec.setting, rec.p, rec.replication, rec.method,
                repr(float(rec.lam)), repr(float(rec.test_loss)),
            ])


def write_summary_json(path, result: ExperimentResult) -> None:
    cfg = result.config
    doc = {
        "setting": cfg.setting,
        "dims": list(cfg.dims),
        "n_train": cfg.n_train,
        "n_tune": cfg.n_tune,
        "n_test": cfg.n_test,
        "replications": cfg.replications,
        "lambda_grid": list(cfg.lambda_grid),
        "boundaries": list(cfg.resolve_boundaries().values),
        "master_seed": cfg.master_seed,
        "bayes_floor": result.bayes_floor,
        "summaries": [
            {"method": s.method, "p": s.p, "median": s.median, "se": s.se, "iqr": s.iqr}
            for s in result.summaries
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def summary_table(result: ExperimentResult) -> str:
    lines = [f"{'setting':>8} {'p':>4} {'method':>10} {'median':>10} {'se':>10} {'iqr':>10}"]
    for s in result.summaries:
        lines.append(
            f"{result.config.setting:>8} {s.p:>4} {s.method:>10} "
            f"{s.median:>10.4f} {s.se:>10.4f} {s.iqr:>10.4f}"
        )
    lines.append(f"bayes floor: {result.bayes_floor:.6f}")
    return "\n".join(lines)
