"""Benchmark generators with piecewise constant conditional class probability.

Six built-in settings draw features uniformly from a box and assign
P(Y=+1 | x) by a step function of the first coordinate, then apply a
random rotation so no single feature carries the signal.  Family 1
(settings 1.1-1.3) uses the box [-8, 8] x [-1, 1]^(p-1) with equal-width
probability bands; family 2 (2.1-2.3) uses [-4, 4] x [-1, 1]^(p-1) with
unequal bands (heavy tails, one asymmetric case).  Band edges and
probabilities are stored as exact fractions so the analytic Bayes risk
integrates band masses without rounding.

Randomness comes from the counter-based Philox generator keyed through
``numpy.random.SeedSequence(master_seed, spawn_key=stream)``: the same
master seed and stream indices always reproduce the same draws, and
disjoint stream tuples give independent substreams, so replications can
run in any order or in parallel.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bands import Boundaries, brute_force_bayes, interval_loss_table
from .data import LabeledSample

__all__ = [
    "Setting",
    "SETTINGS",
    "make_rng",
    "random_rotation",
    "generate_setting",
    "band_masses",
    "bayes_risk",
    "replication_datasets",
    "default_boundaries",
]

# Stream indices for per-replication substreams (shared with the CLI).
STREAM_ROTATION = 0
STREAM_TRAIN = 1
STREAM_TUNE = 2
STREAM_TEST = 3
STREAM_OF_ROLE = {"rotation": STREAM_ROTATION, "train": STREAM_TRAIN, "tune": STREAM_TUNE, "test": STREAM_TEST}


@dataclass(frozen=True)
class Setting:
    """One benchmark setting: a box, a step function on x1, designated thresholds."""

    name: str
    half_width: Fraction
    breaks: tuple[Fraction, ...]
    probs: tuple[Fraction, ...]
    designated: tuple[Fraction, ...]


def _s(name, hw, breaks, probs, designated):
    return Setting(
        name=name,
        half_width=Fraction(hw),
        breaks=tuple(Fraction(b) for b in breaks),
        probs=tuple(Fraction(p) for p in probs),
        designated=tuple(Fraction(d) for d in designated),
    )


SETTINGS: dict[str, Setting] = {
    "1.1": _s("1.1", 8, ["0"], ["1/4", "3/4"], ["1/2"]),
    "1.2": _s("1.2", 8, ["-8/3", "8/3"], ["1/6", "3/6", "5/6"], ["1/3", "2/3"]),
    "1.3": _s("1.3", 8, ["-4", "0", "4"], ["1/8", "3/8", "5/8", "7/8"], ["1/4", "2/4", "3/4"]),
    "2.1": _s("2.1", 4, ["-3/5", "3/5"], ["1/6", "3/6", "5/6"], ["1/3", "2/3"]),
    "2.2": _s("2.2", 4, ["-2", "0"], ["1/6", "3/6", "5/6"], ["1/3", "2/3"]),
    "2.3": _s("2.3", 4, ["-4/5", "0", "4/5"], ["1/8", "3/8", "5/8", "7/8"], ["1/4", "2/4", "3/4"]),
}


def _lookup(setting) -> Setting:
    if isinstance(setting, Setting):
        return setting
    try:
        return SETTINGS[str(setting)]
    except KeyError:
        raise ValueError(
            f"unknown setting {setting!r}; available: {', '.join(sorted(SETTINGS))}"
        ) from None


def default_boundaries(setting) -> Boundaries:
    """The threshold set matching the setting's probability bands."""
    s = _lookup(setting)
    return Boundaries([float(d) for d in s.designated])


def make_rng(master_seed: int, *stream: int) -> np.random.Generator:
    """Philox generator for (master seed, substream) — same inputs, same draws."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


def random_rotation(p: int, rng: np.random.Generator) -> np.ndarray:
    """Random p x p orthogonal matrix: QR of a Gaussian matrix, each column
    flipped so the returned factor has a nonnegative diagonal (deterministic
    in the draws; the 1x1 case is always +1)."""
    if p < 1:
        raise ValueError("dimension must be >= 1")
    g = rng.standard_normal((p, p))
    q, _ = np.linalg.qr(g)
    signs = np.where(np.diag(q) >= 0.0, 1.0, -1.0)
    return q * signs


def _band_index(setting: Setting, x1: np.ndarray) -> np.ndarray:
    # bands are half-open on the right: [edge_i, edge_{i+1})
    breaks = np.array([float(b) for b in setting.breaks])
    return np.searchsorted(breaks, x1, side="right")


def generate_setting(setting, n: int, p: int, rng: np.random.Generator, rotation="random") -> LabeledSample:
    """Draw ``n`` labeled points in dimension ``p`` from a benchmark setting.

    ``rotation`` is ``"random"`` (draw one rotation from ``rng`` and apply
    it to all points), ``None`` (leave coordinates unrotated), or an
    explicit orthogonal matrix (shared across datasets of one
    replication).  ``true_probs`` records the pre-rotation step-function
    value for each point.
    """
    s = _lookup(setting)
    if n < 1 or p < 1:
        raise ValueError("need n >= 1 and p >= 1")
    hw = float(s.half_width)
    x1 = rng.uniform(-hw, hw, size=n)
    if p > 1:
        rest = rng.uniform(-1.0, 1.0, size=(n, p - 1))
        x = np.column_stack([x1, rest])
    else:
        x = x1[:, None]
    probs = np.array([float(q) for q in s.probs])[_band_index(s, x1)]
    y = np.where(rng.random(n) < probs, 1, -1)
    if isinstance(rotation, str) and rotation == "random":
        rotation = random_rotation(p, rng)
    if rotation is not None:
        q = np.asarray(rotation, dtype=float)
        if q.shape != (p, p):
            raise ValueError(f"rotation must be {p}x{p}")
        x = x @ q.T
    return LabeledSample(features=x, labels=y, true_probs=probs)


def band_masses(setting) -> list[Fraction]:
    """Probability mass of each band: width over box length, exactly."""
    s = _lookup(setting)
    edges = [-s.half_width, *s.breaks, s.half_width]
    total = 2 * s.half_width
    return [(edges[i + 1] - edges[i]) / total for i in range(len(edges) - 1)]


def bayes_risk(setting, boundaries: Boundaries, n_mc: int | None = None, rng=None, method: str = "analytic") -> float:
    """Smallest achievable stepwise loss for a setting under given thresholds.

    ``method="analytic"`` integrates exactly over the probability bands:
    each band contributes its (rational) mass times the best expected loss
    over candidate band predictions.  ``method="monte-carlo"`` averages
    the loss of the enumerated-best prediction over ``n_mc`` fresh draws.
    """
    s = _lookup(setting)
    loss_pos, loss_neg = interval_loss_table(boundaries)
    band_probs = [float(q) for q in s.probs]
    decisions = [brute_force_bayes(q, boundaries) for q in band_probs]

    if method == "analytic":
        masses = band_masses(s)
        total = 0.0
        for mass, q, k in zip(masses, band_probs, decisions):
            total += float(mass) * (q * loss_pos[k] + (1.0 - q) * loss_neg[k])
        return total
    if method == "monte-carlo":
        if n_mc is None or n_mc < 1 or rng is None:
            raise ValueError("monte-carlo method needs n_mc >= 1 and an rng")
        hw = float(s.half_width)
        x1 = rng.uniform(-hw, hw, size=n_mc)
        band = _band_index(s, x1)
        q = np.array(band_probs)[band]
        k = np.array(decisions)[band]
        y_pos = rng.random(n_mc) < q
        loss = np.where(y_pos, loss_pos[k], loss_neg[k])
        return float(np.mean(loss))
    raise ValueError(f"method must be 'analytic' or 'monte-carlo', got {method!r}")


def replication_datasets(setting, p: int, n_train: int, n_tune: int, n_test: int,
                         master_seed: int, replication: int, rotate: bool = True):
    """(train, tune, test) for one replication; the three sets share one rotation.

    Each dataset draws from its own substream of the master seed, so any
    one of them can be regenerated independently (the CLI exposes this
    through ``--replication`` and ``--role``).
    """
    rotation = None
    if rotate:
        rotation = random_rotation(p, make_rng(master_seed, replication, STREAM_ROTATION))
    out = []
    for n, stream in ((n_train, STREAM_TRAIN), (n_tune, STREAM_TUNE), (n_test, STREAM_TEST)):
        rng = make_rng(master_seed, replication, stream)
        out.append(generate_setting(setting, n, p, rng, rotation=rotation))
    return tuple(out)
