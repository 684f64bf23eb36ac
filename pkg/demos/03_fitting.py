"""Fitting linear band classifiers by projected subgradient descent.

Draws a benchmark dataset whose conditional probability is a step
function of one (rotated) direction, fits the piecewise linear surrogate
and the logistic baseline, and scores both with the stepwise loss against
the analytic best-possible value.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from probstrat import (
    SolverConfig,
    bayes_risk,
    default_boundaries,
    evaluate_model,
    logistic_surrogate,
    predict_margin,
    replication_datasets,
    tune_lambda,
)

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

SETTING = "1.2"  # three probability bands 1/6, 3/6, 5/6 on a rotated strip
boundaries = default_boundaries(SETTING)
spec = logistic_surrogate(boundaries)
train, tune, test = replication_datasets(SETTING, 2, 400, 200, 20_000, master_seed=7, replication=0)
config = SolverConfig(max_iterations=4000, rel_tolerance=1e-9)
grid = tuple(2.0 ** e for e in range(-10, 6))

lam_pw, pw = tune_lambda(train, tune, boundaries, spec, grid, "piecewise", config)
lam_lg, lg = tune_lambda(train, tune, boundaries, None, grid, "logistic", config)
floor = bayes_risk(SETTING, boundaries)
print(f"setting {SETTING}, thresholds {boundaries.values.tolist()}")
print(f"  piecewise test loss: {evaluate_model(pw, test, boundaries, spec, 'piecewise'):.4f} (lambda {lam_pw})")
print(f"  logistic  test loss: {evaluate_model(lg, test, boundaries, spec, 'logistic'):.4f} (lambda {lam_lg})")
print(f"  best possible:       {floor:.4f}")

# Decision bands of the piecewise model in the (rotated) feature plane.
fig, ax = plt.subplots(figsize=(6.5, 5))
sub = train.features
colors = np.where(train.labels == 1, "tab:orange", "tab:green")
ax.scatter(sub[:, 0], sub[:, 1], c=colors, s=10, alpha=0.7)
xg = np.linspace(sub[:, 0].min(), sub[:, 0].max(), 300)
yg = np.linspace(sub[:, 1].min(), sub[:, 1].max(), 300)
xx, yy = np.meshgrid(xg, yg)
f = predict_margin(pw, np.column_stack([xx.ravel(), yy.ravel()])).reshape(xx.shape)
for t in spec.thresholds:
    ax.contour(xx, yy, f, levels=[t], colors="k", linewidths=1)
ax.set_title(f"Fitted band boundaries, setting {SETTING}")
ax.set_xlabel("x1 (rotated)")
ax.set_ylabel("x2 (rotated)")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "fitting.png"), dpi=120)
print(f"wrote {OUT}/fitting.png")
