import math

import numpy as np
import pytest

from core.conformal import (Interval, ScpPredictor, classification_score, interval_set,
                            label_set, scp_threshold)
from core.exceptions import EmptyCalibration, NegativeThreshold


def test_scp_threshold_examples():
    assert scp_threshold(list(range(1, 20)), 0.1) == 18.0
    assert scp_threshold(list(range(1, 10)), 0.05) == math.inf
    assert scp_threshold([1, 1, 1, 2], 0.5) == 1.0
    assert scp_threshold([5.0], 0.4) == math.inf


def test_scp_threshold_errors():
    with pytest.raises(EmptyCalibration):
        scp_threshold([], 0.1)
    with pytest.raises(ValueError):
        scp_threshold([1.0, 2.0], 0.0)
    with pytest.raises(ValueError):
        scp_threshold([1.0, 2.0], 1.0)


def test_scp_threshold_monotone_and_permutation_invariant():
    rng = np.random.default_rng(6)
    scores = rng.exponential(size=200)
    thresholds = [scp_threshold(scores, alpha) for alpha in (0.05, 0.1, 0.2, 0.3, 0.5)]
    assert all(a >= b for a, b in zip(thresholds, thresholds[1:]))
    assert scp_threshold(rng.permutation(scores), 0.1) == scp_threshold(scores, 0.1)


@pytest.mark.parametrize("alpha", [0.1, 0.2])
def test_scp_marginal_coverage_under_exchangeability(alpha):
    rng = np.random.default_rng(7)
    n, n_test, trials = 100, 100, 2000
    per_trial = np.empty(trials)
    for t in range(trials):
        scores = np.abs(rng.normal(size=n + n_test))
        per_trial[t] = np.mean(scores[n:] <= scp_threshold(scores[:n], alpha))
    coverage = per_trial.mean()
    assert coverage >= 1 - alpha - 0.01
    assert coverage <= 1 - alpha + 1 / (n + 1) + 0.01


def test_interval_set():
    interval = interval_set(2.0, 0.5)
    assert interval == Interval(1.5, 2.5)
    assert interval.length == pytest.approx(1.0)
    assert interval.contains(2.4) and not interval.contains(2.6)

    unbounded = interval_set(2.0, math.inf)
    assert unbounded.lower == -math.inf and unbounded.upper == math.inf

    batch = interval_set(np.array([0.0, 1.0]), 1.0)
    np.testing.assert_array_equal(batch.lower, [-1.0, 0.0])
    np.testing.assert_array_equal(batch.contains(np.array([0.5, 2.5])), [True, False])

    assert interval_set(3.0, 0.0) == Interval(3.0, 3.0)
    with pytest.raises(NegativeThreshold):
        interval_set(2.0, -0.1)


def test_classification_helpers():
    probabilities = np.array([0.7, 0.2, 0.1])
    assert classification_score(probabilities, 0) == pytest.approx(0.3)
    np.testing.assert_array_equal(label_set(probabilities, 0.85), [0, 1])
    assert label_set(probabilities, 0.1).size == 0

    batch = np.array([[0.7, 0.3], [0.4, 0.6]])
    np.testing.assert_allclose(classification_score(batch, np.array([1, 1])), [0.7, 0.4])


def test_scp_predictor():
    predictor = ScpPredictor.fit(list(range(1, 20)), 0.1)
    assert predictor.threshold == 18.0
    assert predictor.predict_interval(0.0) == Interval(-18.0, 18.0)
