"""Piecewise linear surrogates from logistic tangents.

The stepwise loss is discontinuous, so models are fit through a convex
piecewise linear stand-in: one affine segment per threshold, each tangent
to the logistic loss at log(pi/(1-pi)).  This demo prints the segment
table, the alignment report, and the excess-risk constant, and plots the
surrogate pair against the logistic curve.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from probstrat import Boundaries, check_consistency, eval_surrogate, logistic_surrogate, risk_constant

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

b = Boundaries([0.2, 0.4, 0.6])
spec = logistic_surrogate(b)

print("segments for thresholds", b.values.tolist())
print(f"  {'pi':>6} {'A+':>10} {'B+':>8} {'A-':>10} {'B-':>8} {'delta':>10}")
for k in range(spec.K):
    print(f"  {b.values[k]:>6.2f} {spec.pos_intercepts[k]:>10.6f} {spec.pos_slopes[k]:>8.3f}"
          f" {spec.neg_intercepts[k]:>10.6f} {spec.neg_slopes[k]:>8.3f} {spec.thresholds[k]:>10.6f}")
print("kinks on the margin axis:", np.round(spec.hinges, 6).tolist())

report = check_consistency(spec)
print(f"\nalignment: C1={report.c1_ok} C2={report.c2_ok} C3={report.c3_ok}"
      f"  max slope-ratio residual={np.max(np.abs(report.eq8_residuals)):.2e}")
print(f"excess-risk constant: {risk_constant(spec):.6f}")

# A single threshold at 1/2 recovers a rescaled hinge loss.
s1 = logistic_surrogate(Boundaries([0.5]))
zs = np.array([-1.0, 0.0, 1.0, 2 * np.log(2), 3.0])
hinge = np.log(2) * np.maximum(0.0, 1.0 - zs / (2 * np.log(2)))
print("\nthreshold 0.5 vs rescaled hinge:",
      np.allclose(eval_surrogate(s1, 1, zs), hinge, atol=1e-12))

z = np.linspace(-4, 4, 400)
fig, ax = plt.subplots(figsize=(7, 4.5))
ax.plot(z, eval_surrogate(spec, 1, z), color="tab:orange", label="positive-class surrogate")
ax.plot(z, eval_surrogate(spec, -1, z), color="tab:green", label="negative-class surrogate")
ax.plot(z, np.logaddexp(0, -z), "k:", lw=1, label="logistic loss")
for t in spec.thresholds:
    ax.axvline(t, color="gray", lw=0.5)
    ax.axvline(-t, color="gray", lw=0.5, ls=":")
ax.scatter(spec.hinges, eval_surrogate(spec, 1, spec.hinges), s=25,
           facecolors="none", edgecolors="tab:orange")
ax.set_xlabel("functional margin y f(x)")
ax.set_ylabel("loss")
ax.set_title("Tangent-segment surrogates for thresholds 0.2, 0.4, 0.6")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(OUT, "surrogates.png"), dpi=120)
print(f"wrote {OUT}/surrogates.png")
