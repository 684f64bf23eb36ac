"""Probability bands and the stepwise loss.

A set of thresholds pi_1 < ... < pi_K splits [0, 1] into K+1 bands; the
learning task is to predict which band contains P(Y=+1 | x).  This demo
shows the loss that scores such predictions, its best-possible (Bayes)
band choice, and how densely spaced thresholds approach the squared-error
loss of full probability estimation.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from probstrat import (
    Boundaries,
    brute_force_bayes,
    interval_index,
    soft_limit_loss,
    theoretical_loss,
)

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

# One threshold at 1/2 is ordinary hard classification; the loss is 0-1.
b1 = Boundaries([0.5])
print("single threshold at 0.5 (hard classification):")
for y in (1, -1):
    print(f"  y={y:+d}: loss per predicted band =",
          [theoretical_loss(y, k, b1) for k in range(2)])

# Three thresholds stratify patients into four risk groups.
b3 = Boundaries([0.2, 0.4, 0.6])
print("\nthresholds (0.2, 0.4, 0.6), four bands:")
for y in (1, -1):
    print(f"  y={y:+d}: loss per predicted band =",
          [round(theoretical_loss(y, k, b3), 4) for k in range(4)])

# The minimizing band is always the band that contains the probability.
print("\nBayes band vs direct band lookup:")
for p in (0.05, 0.3, 0.45, 0.7):
    print(f"  p={p}: argmin over bands = {brute_force_bayes(p, b3)},"
          f" band containing p = {interval_index(p, b3)}")

# As K grows, the stepwise loss of predicting the band containing g
# approaches the squared-error loss (I{y=+1} - g)^2.
print("\nsup gap to the squared-error loss on a 101-point grid:")
grid = np.linspace(0, 1, 101)
for K in (8, 16, 32, 64):
    b = Boundaries(np.arange(1, K + 1) / (K + 1))
    worst = max(
        abs(theoretical_loss(y, interval_index(float(g), b), b) - soft_limit_loss(y, float(g)))
        for g in grid for y in (-1, 1)
    )
    print(f"  K={K:3d}: {worst:.4f}")

fig, axes = plt.subplots(1, 3, figsize=(12, 3.5), sharey=True)
gs = np.linspace(0, 1, 400)
for ax, b, title in (
    (axes[0], b1, "thresholds: 0.5"),
    (axes[1], b3, "thresholds: 0.2, 0.4, 0.6"),
    (axes[2], Boundaries(np.arange(1, 33) / 33), "32 thresholds"),
):
    for y, color in ((1, "tab:orange"), (-1, "tab:green")):
        losses = [theoretical_loss(y, interval_index(float(g), b), b) for g in gs]
        ax.step(gs, losses, where="post", color=color, label=f"y={y:+d}")
    ax.plot(gs, (1 - gs) ** 2, "--", color="tab:orange", lw=1, alpha=0.6)
    ax.plot(gs, gs ** 2, "--", color="tab:green", lw=1, alpha=0.6)
    ax.set_title(title)
    ax.set_xlabel("predicted probability g")
axes[0].set_ylabel("loss")
axes[0].legend()
fig.suptitle("Stepwise losses and their squared-error limit (dashed)")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "bands_and_losses.png"), dpi=120)
print(f"\nwrote {OUT}/bands_and_losses.png")
