"""Tuning and replication-harness tests."""

import numpy as np
import pytest

from probstrat.bands import Boundaries, interval_index
from probstrat.data import LabeledSample
from probstrat.experiment import (
    ExperimentConfig,
    evaluate_model,
    mean_stepwise_loss,
    run_replications,
    tune_lambda,
    tune_lambda_cv,
    write_results_csv,
)
from probstrat.simulate import generate_setting, make_rng
from probstrat.solver import LinearModel, SolverConfig
from probstrat.surrogate import logistic_surrogate

B1 = Boundaries([0.5])
S1 = logistic_surrogate(B1)
FAST = SolverConfig(max_iterations=800, rel_tolerance=1e-9)


def separated_sample(n, seed):
    rng = np.random.default_rng(seed)
    y = rng.choice([-1, 1], size=n)
    x = y * rng.uniform(1.5, 2.5, size=n)
    return LabeledSample(x[:, None], y)


def test_tune_single_element_grid():
    train, tune = separated_sample(30, 0), separated_sample(30, 1)
    lam, model = tune_lambda(train, tune, B1, S1, [0.125], "piecewise", FAST)
    assert lam == 0.125
    assert isinstance(model, LinearModel)


def test_tune_prefers_working_penalty_over_huge_one():
    # a huge penalty collapses the model through the projection radius and
    # scores worse on the tuning set
    train, tune = separated_sample(40, 2), separated_sample(40, 3)
    lam, _ = tune_lambda(train, tune, B1, S1, [2.0 ** 30, 0.01], "piecewise", FAST)
    assert lam == 0.01


def test_tune_tie_goes_to_smallest():
    # both candidate fits classify the well-separated tuning set perfectly,
    # so the scores tie at zero and the smaller penalty wins
    train, tune = separated_sample(40, 4), separated_sample(40, 5)
    lam, _ = tune_lambda(train, tune, B1, S1, [0.02, 0.01], "piecewise", FAST)
    assert lam == 0.01


def test_tune_logistic_uses_likelihood():
    train, tune = separated_sample(40, 6), separated_sample(40, 7)
    lam, model = tune_lambda(train, tune, B1, None, [2.0 ** 30, 0.05], "logistic", FAST)
    assert lam == 0.05
    assert isinstance(model, LinearModel)


def test_tune_empty_grid_rejected():
    train, tune = separated_sample(10, 8), separated_sample(10, 9)
    with pytest.raises(ValueError):
        tune_lambda(train, tune, B1, S1, [], "piecewise", FAST)


def test_tune_cv_smoke():
    train = separated_sample(40, 10)
    lam, model = tune_lambda_cv(train, B1, S1, [0.02, 0.01], "piecewise", n_folds=2, config=FAST)
    assert lam in (0.01, 0.02)
    assert isinstance(model, LinearModel)


def test_evaluate_constant_top_band_on_negative_data():
    b = Boundaries([0.25, 0.5, 0.75])
    spec = logistic_surrogate(b)
    data = LabeledSample(np.zeros((50, 1)), -np.ones(50, dtype=int))
    # margin above the last threshold on every point: always the top band
    model = LinearModel(w=np.zeros(1), b=float(spec.thresholds[-1]) + 5.0)
    loss = evaluate_model(model, data, b, spec, "piecewise")
    assert loss == (2.0 / 3.0) * (0.25 + 0.5 + 0.75) / 1.0 / 1.0  # every threshold fires
    assert 0.0 <= loss <= 2.0


def test_oracle_band_predictions_reach_bayes_floor():
    sample = generate_setting("1.1", 50_000, 2, make_rng(3, 0, 3))
    k = interval_index(sample.true_probs, B1)
    assert mean_stepwise_loss(sample.labels, k, B1) == pytest.approx(0.25, abs=0.01)


def test_run_replications_single_record():
    cfg = ExperimentConfig(setting="1.1", dims=(2,), n_train=40, n_tune=40, n_test=500,
                           replications=1, lambda_grid=(0.25, 0.5), master_seed=5, solver=FAST)
    res = run_replications(cfg, max_workers=1)
    assert len(res.records) == 2
    for method in ("piecewise", "logistic"):
        s = res.summary_for(method, 2)
        rec = [r for r in res.records if r.method == method][0]
        assert s.median == rec.test_loss
        assert s.iqr == 0.0
    assert res.bayes_floor == pytest.approx(0.25, abs=1e-12)


def test_run_replications_reproducible_and_parallel_identical():
    cfg = ExperimentConfig(setting="1.2", dims=(2,), n_train=30, n_tune=30, n_test=300,
                           replications=4, lambda_grid=(0.125, 0.5), master_seed=9, solver=FAST)
    serial = run_replications(cfg, max_workers=1)
    parallel = run_replications(cfg, max_workers=2)
    assert serial.records == parallel.records
    assert serial.summaries == parallel.summaries


def test_results_csv_layout(tmp_path):
    cfg = ExperimentConfig(setting="1.1", dims=(2,), n_train=20, n_tune=20, n_test=100,
                           replications=2, lambda_grid=(0.5,), master_seed=1, solver=FAST)
    res = run_replications(cfg, max_workers=1)
    path = tmp_path / "results.csv"
    write_results_csv(path, res)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "setting,p,replication,method,lambda,test_loss"
    assert len(lines) == 1 + 2 * 2  # 2 methods x 2 replications
    # medians bounded below by the analytic floor (small noise slack)
    for s in res.summaries:
        assert s.median >= res.bayes_floor - 0.01


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(replications=0)
    with pytest.raises(ValueError):
        ExperimentConfig(lambda_grid=())
    with pytest.raises(ValueError):
        ExperimentConfig(lambda_grid=(0.0,))
    with pytest.raises(ValueError):
        ExperimentConfig(dims=())


def test_ms_threads_caps_workers(monkeypatch):
    from probstrat.experiment import _resolve_workers

    monkeypatch.setenv("MS_THREADS", "1")
    assert _resolve_workers(8) == 1
    monkeypatch.setenv("MS_THREADS", "4")
    assert _resolve_workers(2) == 2
    monkeypatch.delenv("MS_THREADS")
    assert _resolve_workers(3) >= 1


def test_run_replications_multiple_dims():
    cfg = ExperimentConfig(setting="1.1", dims=(1, 3), n_train=20, n_tune=20, n_test=100,
                           replications=2, lambda_grid=(0.5,), master_seed=3, solver=FAST)
    res = run_replications(cfg, max_workers=1)
    assert len(res.records) == 2 * 2 * 2  # dims x replications x methods
    assert {s.p for s in res.summaries} == {1, 3}
    for p in (1, 3):
        for method in ("piecewise", "logistic"):
            res.summary_for(method, p)
