# -*- coding: utf-8 -*-
"""
Split Conformal Prediction

The standard exchangeable-data predictor: threshold the calibration
scores at the (n+1)(1-alpha)/n empirical quantile and invert the
absolute-residual score into an interval.
"""

import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from core.empirical import ecdf_build, quantile
from core.exceptions import EmptyCalibration, EmptyInput, NegativeThreshold


class Interval(namedtuple('Interval', ['lower', 'upper'])):
    """
    Prediction interval(s); lower/upper may be scalars or arrays.
    """
    __slots__ = ()

    @property
    def length(self):
        return np.asarray(self.upper) - np.asarray(self.lower)

    def contains(self, y):
        return (np.asarray(self.lower) <= y) & (y <= np.asarray(self.upper))


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def scp_level(n, alpha):
    return (n + 1) * (1.0 - alpha) / n


def scp_threshold(calibration_scores, alpha):
    """
    The ceil((n+1)(1-alpha))-th smallest calibration score, or +inf when
    that rank exceeds n (the full prediction set).

    :param calibration_scores: n >= 1 nonconformity scores.
    :param alpha: Miscoverage level in (0, 1).
    :raises EmptyCalibration: if no scores are given.
    """
    _check_alpha(alpha)
    try:
        calibration = ecdf_build(calibration_scores)
    except EmptyInput:
        raise EmptyCalibration("Split conformal prediction needs at least one calibration score") from None
    return quantile(calibration, scp_level(calibration.m, alpha))


def interval_set(model_prediction, threshold):
    """
    Inverts s(x, y) = |y_hat - y| <= threshold into [y_hat - t, y_hat + t].

    :param model_prediction: Point prediction(s) y_hat.
    :param threshold: Non-negative score threshold, or +inf for the whole real line.
    :raises NegativeThreshold: if threshold < 0.
    """
    if threshold < 0:
        raise NegativeThreshold(f"Threshold must be non-negative, got {threshold}")
    prediction = np.asarray(model_prediction, dtype=float)
    if math.isinf(threshold):
        return Interval(np.full_like(prediction, -np.inf)[()], np.full_like(prediction, np.inf)[()])
    return Interval((prediction - threshold)[()], (prediction + threshold)[()])


def classification_score(probabilities, label):
    """
    s(x, y) = 1 - p_y for a classifier's probability vector(s).
    """
    probabilities = np.asarray(probabilities, dtype=float)
    if probabilities.ndim == 1:
        return 1.0 - float(probabilities[label])
    rows = np.arange(len(probabilities))
    return 1.0 - probabilities[rows, np.asarray(label)]


def label_set(probabilities, threshold):
    """
    Labels whose classification score is within the threshold.
    """
    probabilities = np.asarray(probabilities, dtype=float)
    return np.flatnonzero(1.0 - probabilities <= threshold)


@dataclass(frozen=True, eq=False)
class ScpPredictor:
    """
    A fitted split conformal predictor.
    """
    calibration: object
    alpha: float
    threshold: float

    @classmethod
    def fit(cls, calibration_scores, alpha):
        threshold = scp_threshold(calibration_scores, alpha)
        return cls(ecdf_build(calibration_scores), alpha, threshold)

    def predict_interval(self, model_prediction):
        return interval_set(model_prediction, self.threshold)


# Example Usage
if __name__ == '__main__':
    scores = list(range(1, 20))
    print(f"SCP threshold (alpha=0.1, n=19) = {scp_threshold(scores, 0.1)}")
    print(f"Interval around 2.0 at t=0.5   = {interval_set(2.0, 0.5)}")
