"""Generator and Bayes-oracle tests."""

from fractions import Fraction

import numpy as np
import pytest

from probstrat.bands import Boundaries
from probstrat.simulate import (
    SETTINGS,
    band_masses,
    bayes_risk,
    default_boundaries,
    generate_setting,
    make_rng,
    random_rotation,
    replication_datasets,
)

# band-by-band integration oracle values (exact fractions)
ANALYTIC_RISKS = {
    "1.1": Fraction(1, 4),
    "1.2": Fraction(2, 9),
    "1.3": Fraction(5, 24),
    "2.1": Fraction(23, 120),
    "2.2": Fraction(5, 24),
    "2.3": Fraction(19, 120),
}


def step_probability(setting, x1):
    """Literal step-function tables, written out as an independent oracle."""
    tables = {
        "1.1": ([0.0], [0.25, 0.75]),
        "1.2": ([-8 / 3, 8 / 3], [1 / 6, 3 / 6, 5 / 6]),
        "1.3": ([-4.0, 0.0, 4.0], [1 / 8, 3 / 8, 5 / 8, 7 / 8]),
        "2.1": ([-0.6, 0.6], [1 / 6, 3 / 6, 5 / 6]),
        "2.2": ([-2.0, 0.0], [1 / 6, 3 / 6, 5 / 6]),
        "2.3": ([-0.8, 0.0, 0.8], [1 / 8, 3 / 8, 5 / 8, 7 / 8]),
    }
    cuts, probs = tables[setting]
    k = sum(x1 >= c for c in cuts)
    return probs[k]


def test_rotation_orthogonal_and_deterministic():
    for p in (1, 2, 5, 20):
        q = random_rotation(p, make_rng(123, 0, 0))
        assert np.max(np.abs(q.T @ q - np.eye(p))) < 1e-10
    assert random_rotation(1, make_rng(5)).tolist() == [[1.0]]
    a = random_rotation(4, make_rng(7, 1))
    b = random_rotation(4, make_rng(7, 1))
    c = random_rotation(4, make_rng(7, 2))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    with pytest.raises(ValueError):
        random_rotation(0, make_rng(1))


@pytest.mark.parametrize("name", sorted(SETTINGS))
def test_true_probs_follow_step_function(name):
    sample = generate_setting(name, 2000, 3, make_rng(31, 0, 1), rotation=None)
    x1 = sample.features[:, 0]
    expected = np.array([step_probability(name, v) for v in x1])
    assert np.array_equal(sample.true_probs, expected)
    hw = float(SETTINGS[name].half_width)
    assert np.all(np.abs(x1) <= hw)
    assert np.all(np.abs(sample.features[:, 1:]) <= 1.0)
    assert set(np.unique(sample.labels)) <= {-1, 1}


def test_probe_points():
    # spot values of the step tables
    assert step_probability("1.1", -3.0) == 0.25
    assert step_probability("2.3", 0.5) == 5 / 8


def test_band_fractions_setting_12():
    sample = generate_setting("1.2", 100_000, 2, make_rng(77, 0, 1), rotation=None)
    x1 = sample.features[:, 0]
    for lo, hi in ((-8, -8 / 3), (-8 / 3, 8 / 3), (8 / 3, 8)):
        frac = np.mean((x1 >= lo) & (x1 < hi))
        assert frac == pytest.approx(1 / 3, abs=0.01)


def test_rotation_moves_features_not_labels():
    q = random_rotation(3, make_rng(9, 0, 0))
    plain = generate_setting("1.3", 500, 3, make_rng(9, 0, 1), rotation=None)
    rotated = generate_setting("1.3", 500, 3, make_rng(9, 0, 1), rotation=q)
    assert np.array_equal(plain.labels, rotated.labels)
    assert np.array_equal(plain.true_probs, rotated.true_probs)
    assert np.allclose(rotated.features, plain.features @ q.T)


def test_label_frequency_matches_probability():
    sample = generate_setting("1.1", 100_000, 2, make_rng(13, 0, 1))
    pos_rate = np.mean(sample.labels == 1)
    assert pos_rate == pytest.approx(0.5, abs=0.01)  # bands 1/4 and 3/4, equal mass


def test_band_masses_exact():
    for name, s in SETTINGS.items():
        masses = band_masses(name)
        assert sum(masses) == 1
        total = 2 * s.half_width
        edges = [-s.half_width, *s.breaks, s.half_width]
        for i, m in enumerate(masses):
            assert m == (edges[i + 1] - edges[i]) / total


@pytest.mark.parametrize("name", sorted(SETTINGS))
def test_bayes_risk_analytic(name):
    value = bayes_risk(name, default_boundaries(name), method="analytic")
    assert value == pytest.approx(float(ANALYTIC_RISKS[name]), abs=1e-12)


def test_bayes_risk_monte_carlo_agrees():
    for name in ("1.1", "2.2"):
        mc = bayes_risk(name, default_boundaries(name), n_mc=200_000,
                        rng=make_rng(55), method="monte-carlo")
        assert mc == pytest.approx(float(ANALYTIC_RISKS[name]), abs=0.005)
    with pytest.raises(ValueError):
        bayes_risk("1.1", default_boundaries("1.1"), method="monte-carlo")
    with pytest.raises(ValueError):
        bayes_risk("9.9", Boundaries([0.5]))


def test_bayes_risk_dominated_by_constant_rules():
    # the floor never exceeds the risk of any constant-band rule (same loss)
    from probstrat.bands import interval_loss_table

    for name in ("1.2", "2.3"):
        b = default_boundaries(name)
        floor = bayes_risk(name, b)
        lp, ln = interval_loss_table(b)
        masses = [float(m) for m in band_masses(name)]
        probs = [float(q) for q in SETTINGS[name].probs]
        for k in range(b.K + 1):
            fixed = sum(m * (q * lp[k] + (1 - q) * ln[k]) for m, q in zip(masses, probs))
            assert floor <= fixed + 1e-12


def test_replication_datasets_share_rotation_and_split_streams():
    train, tune, test = replication_datasets("1.2", 3, 50, 40, 30, master_seed=17, replication=4)
    assert (train.n, tune.n, test.n) == (50, 40, 30)
    train2, _, _ = replication_datasets("1.2", 3, 50, 40, 30, master_seed=17, replication=4)
    assert np.array_equal(train.features, train2.features)
    assert np.array_equal(train.labels, train2.labels)
    other, _, _ = replication_datasets("1.2", 3, 50, 40, 30, master_seed=17, replication=5)
    assert not np.array_equal(train.features, other.features)
    # same rotation within the replication: unrotating both with the shared
    # rotation puts x1 back on step-function bands consistent with true_probs
    rot = random_rotation(3, make_rng(17, 4, 0))
    for part in (train, tune, test):
        x1 = (part.features @ rot)[:, 0]
        expected = np.array([step_probability("1.2", v) for v in x1])
        assert np.allclose(part.true_probs, expected)


def test_generate_setting_validation():
    with pytest.raises(ValueError):
        generate_setting("3.1", 10, 2, make_rng(1))
    with pytest.raises(ValueError):
        generate_setting("1.1", 0, 2, make_rng(1))
    with pytest.raises(ValueError):
        generate_setting("1.1", 10, 2, make_rng(1), rotation=np.eye(3))
