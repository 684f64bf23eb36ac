"""Binary classification across a spectrum of tasks, from label prediction to
probability estimation, by fitting a set of conditional-probability
thresholds simultaneously.

The pieces: ``bands`` defines threshold partitions of [0, 1] and the
stepwise loss whose minimizer is the band containing the true conditional
probability; ``surrogate`` builds piecewise linear convex losses aligned
to a chosen threshold set; ``solver`` fits linear models by projected
subgradient descent; ``simulate`` provides seeded benchmark generators
with known Bayes risk; ``experiment`` runs tuned, replicated comparisons;
``cli`` wraps it all for CSV/JSON workflows.
"""

from .bands import (
    Boundaries,
    brute_force_bayes,
    interval_index,
    interval_loss_table,
    margin_theoretical_loss,
    predict_interval,
    soft_limit_loss,
    theoretical_loss,
)
from .data import DataError, LabeledSample, read_dataset_csv, write_dataset_csv
from .experiment import (
    DEFAULT_GRID,
    ExperimentConfig,
    ExperimentResult,
    evaluate_model,
    mean_stepwise_loss,
    run_replications,
    tune_lambda,
    tune_lambda_cv,
)
from .simulate import (
    SETTINGS,
    bayes_risk,
    default_boundaries,
    generate_setting,
    make_rng,
    random_rotation,
    replication_datasets,
)
from .solver import (
    LinearModel,
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
from .surrogate import (
    ConsistencyError,
    ConsistencyReport,
    SurrogateSpec,
    build_surrogate,
    check_consistency,
    eval_surrogate,
    load_spec,
    logistic_params,
    logistic_surrogate,
    risk_constant,
    save_spec,
    subgradient,
)

__version__ = "0.1.0"
