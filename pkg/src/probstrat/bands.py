"""Probability-band partitions and the stepwise loss they induce.

A set of K thresholds 0 < pi_1 < ... < pi_K < 1 splits [0, 1] into K+1
bands: band 0 is [0, pi_1] and band k is (pi_k, pi_{k+1}] (right-closed,
with pi_{K+1} = 1).  Predicting the band that contains the conditional
probability P(Y=+1 | X=x) is the target task; the stepwise loss below is
the average of K weighted 0-1 losses, scaled so that a single threshold
at 1/2 reproduces the plain misclassification error.  Its pointwise
minimizer over bands is exactly the band containing the true probability,
which ``brute_force_bayes`` verifies by enumeration.
"""

import numpy as np

__all__ = [
    "Boundaries",
    "interval_index",
    "brute_force_bayes",
    "theoretical_loss",
    "margin_theoretical_loss",
    "predict_interval",
    "soft_limit_loss",
    "interval_loss_table",
]

#: Smallest allowed gap between adjacent thresholds.  Downstream hinge
#: computations divide by slope differences proportional to these gaps.
MIN_GAP = 1e-12


class Boundaries:
    """Ordered probability thresholds defining a (K+1)-band partition of [0, 1].

    Parameters
    ----------
    values : array_like
        Strictly increasing probabilities in the open interval (0, 1),
        with adjacent gaps larger than ``MIN_GAP``.
    """

    def __init__(self, values):
        arr = np.asarray(values, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("boundaries must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(arr)):
            raise ValueError("boundaries must be finite")
        if arr[0] <= 0.0 or arr[-1] >= 1.0:
            raise ValueError("boundaries must lie strictly inside (0, 1)")
        if arr.size > 1 and np.min(np.diff(arr)) <= MIN_GAP:
            raise ValueError(
                f"boundaries must be strictly increasing with gaps > {MIN_GAP:g}"
            )
        arr.flags.writeable = False
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def K(self) -> int:
        return self._values.size

    def interval_bounds(self, k: int) -> tuple[float, float]:
        """Endpoints (lo, hi) of band k, with lo = 0 for k = 0 and hi = 1 for k = K."""
        if not 0 <= k <= self.K:
            raise ValueError(f"band index {k} outside 0..{self.K}")
        lo = 0.0 if k == 0 else float(self._values[k - 1])
        hi = 1.0 if k == self.K else float(self._values[k])
        return lo, hi

    def __len__(self) -> int:
        return self._values.size

    def __eq__(self, other) -> bool:
        return isinstance(other, Boundaries) and np.array_equal(
            self._values, other._values
        )

    def __repr__(self) -> str:
        return f"Boundaries({self._values.tolist()})"


def _check_label(y) -> int:
    y = int(y)
    if y not in (-1, 1):
        raise ValueError(f"label must be -1 or +1, got {y}")
    return y


def interval_index(p, boundaries: Boundaries):
    """Index of the band containing probability ``p``.

    Band 0 is [0, pi_1]; band k is (pi_k, pi_{k+1}].  A value exactly equal
    to a threshold belongs to the lower band (right-closed convention).
    Accepts a scalar or an array of probabilities.
    """
    arr = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("probability must be finite")
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("probability must lie in [0, 1]")
    idx = np.searchsorted(boundaries.values, arr, side="left")
    return int(idx) if np.isscalar(p) or arr.ndim == 0 else idx


def theoretical_loss(y: int, k: int, boundaries: Boundaries) -> float:
    """Stepwise loss of predicting band ``k`` for an observation with label ``y``.

    Average of K weighted 0-1 losses: a positive observation pays
    (1 - pi_j) for every threshold at or above the predicted band, a
    negative one pays pi_j for every threshold below it, and the total is
    scaled by 2/K.  Values lie in [0, 2].
    """
    y = _check_label(y)
    K = boundaries.K
    if not 0 <= k <= K:
        raise ValueError(f"band index {k} outside 0..{K}")
    pi = boundaries.values
    idx = np.arange(K)
    if y == 1:
        terms = np.where(idx >= k, 1.0 - pi, 0.0)
    else:
        terms = np.where(idx < k, pi, 0.0)
    return float((2.0 / K) * np.sum(terms))


def interval_loss_table(boundaries: Boundaries) -> tuple[np.ndarray, np.ndarray]:
    """Per-band loss values ``(loss_pos, loss_neg)``, each of length K+1.

    ``loss_pos[k]`` equals ``theoretical_loss(+1, k, boundaries)`` bitwise
    (same summation), and likewise for the negative class; used to score
    large samples without per-row recomputation.
    """
    K = boundaries.K
    loss_pos = np.array([theoretical_loss(1, k, boundaries) for k in range(K + 1)])
    loss_neg = np.array([theoretical_loss(-1, k, boundaries) for k in range(K + 1)])
    return loss_pos, loss_neg


def brute_force_bayes(p: float, boundaries: Boundaries) -> int:
    """Risk-minimizing band for true probability ``p``, found by enumeration.

    Evaluates the expected stepwise loss p*loss(+1, k) + (1-p)*loss(-1, k)
    for every candidate band and returns the argmin (ties broken toward
    the smallest index).  Independent check of ``interval_index``.
    """
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 0:
        raise ValueError("brute_force_bayes expects a scalar probability")
    if not np.isfinite(arr) or arr < 0.0 or arr > 1.0:
        raise ValueError("probability must lie in [0, 1]")
    p = float(arr)
    loss_pos, loss_neg = interval_loss_table(boundaries)
    expected = p * loss_pos + (1.0 - p) * loss_neg
    return int(np.argmin(expected))


def predict_interval(f, thresholds):
    """Band index for margin value ``f`` given increasing margin thresholds.

    Band 0 collects f <= t_0, band k collects f in (t_{k-1}, t_k], and the
    top band collects everything above the last threshold; a margin exactly
    equal to a threshold belongs to the band closed on the right by it.
    Accepts a scalar or an array of margins.
    """
    t = np.asarray(thresholds, dtype=float)
    if t.ndim != 1 or t.size < 1:
        raise ValueError("thresholds must be a non-empty 1-D sequence")
    if t.size > 1 and np.any(np.diff(t) <= 0):
        raise ValueError("thresholds must be strictly increasing")
    idx = np.searchsorted(t, f, side="left")
    return int(idx) if np.isscalar(f) or np.asarray(f).ndim == 0 else idx


def margin_theoretical_loss(y: int, f: float, boundaries: Boundaries, thresholds) -> float:
    """Stepwise loss expressed on the margin axis.

    Equals ``theoretical_loss(y, predict_interval(f, thresholds), boundaries)``
    exactly: a positive observation pays (1 - pi_j) for every threshold
    t_j >= f, a negative one pays pi_j for every threshold t_j < f.
    """
    y = _check_label(y)
    t = np.asarray(thresholds, dtype=float)
    K = boundaries.K
    if t.ndim != 1 or t.size != K:
        raise ValueError("need one margin threshold per boundary")
    if t.size > 1 and np.any(np.diff(t) <= 0):
        raise ValueError("thresholds must be strictly increasing")
    pi = boundaries.values
    if y == 1:
        terms = np.where(f <= t, 1.0 - pi, 0.0)
    else:
        terms = np.where(f > t, pi, 0.0)
    return float((2.0 / K) * np.sum(terms))


def soft_limit_loss(y: int, g: float) -> float:
    """Squared-error loss (I{y=+1} - g)^2, the dense-threshold limit of the stepwise loss."""
    y = _check_label(y)
    g = float(g)
    if not np.isfinite(g) or g < 0.0 or g > 1.0:
        raise ValueError("probability estimate must lie in [0, 1]")
    return (float(y == 1) - g) ** 2
