"""A small replication study: tuned piecewise vs logistic across settings.

Scaled-down version of the full benchmark (fewer replications, smaller
grid) so it finishes in about a minute; raise the counts to reproduce
the full comparison.  For each setting the piecewise method targets the
setting's designated thresholds and both methods are tuned on held-out
data, then scored by the stepwise loss against the analytic floor.
"""

import time

from probstrat import ExperimentConfig, SolverConfig, run_replications
from probstrat.experiment import summary_table

SOLVER = SolverConfig(max_iterations=800, rel_tolerance=1e-7)

for setting in ("1.1", "1.2", "1.3"):
    t0 = time.time()
    config = ExperimentConfig(
        setting=setting,
        dims=(2,),
        n_train=100,
        n_tune=100,
        n_test=2000,
        replications=10,
        lambda_grid=tuple(2.0 ** e for e in range(-10, 6)),
        master_seed=20240810,
        solver=SOLVER,
    )
    result = run_replications(config)
    print(f"\n=== setting {setting} ({time.time() - t0:.0f}s) ===")
    print(summary_table(result))
