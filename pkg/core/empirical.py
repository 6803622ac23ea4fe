# -*- coding: utf-8 -*-
"""
Empirical Score Distributions

Step-function CDFs of nonconformity scores, the pointwise minimum of
several source CDFs, quantiles, and the DKW failure bound for the
minimum CDF.
"""

import math
from dataclasses import dataclass

import numpy as np

import config
from core.exceptions import EmptyInput, NonFiniteScore


@dataclass(frozen=True, eq=False)
class EmpiricalCdf:
    """
    F(x) = #{i : score_i <= x} / m, stored as the sorted scores.
    """
    sorted_scores: np.ndarray

    @property
    def m(self):
        return len(self.sorted_scores)

    @property
    def atoms(self):
        return self.sorted_scores

    def __call__(self, x):
        counts = np.searchsorted(self.sorted_scores, x, side='right')
        return counts / self.m


@dataclass(frozen=True, eq=False)
class MinCdf:
    """
    F_min(x) = min_i F_i(x) over the source CDFs.
    """
    components: tuple

    @property
    def atoms(self):
        return np.unique(np.concatenate([c.sorted_scores for c in self.components]))

    def __call__(self, x):
        values = np.stack([np.asarray(c(x), dtype=float) for c in self.components])
        return values.min(axis=0)


def _validated_array(scores):
    values = np.asarray(scores, dtype=float).ravel()
    if values.size == 0:
        raise EmptyInput("At least one score is required")
    if not np.all(np.isfinite(values)):
        raise NonFiniteScore(f"Scores must be finite; first offender at index {int(np.argmin(np.isfinite(values)))}")
    return values


def ecdf_build(scores):
    """
    Builds an EmpiricalCdf from raw scores.

    :raises EmptyInput: if no scores are given.
    :raises NonFiniteScore: if any score is nan or infinite.
    """
    values = _validated_array(scores)
    sorted_scores = np.sort(values)
    sorted_scores.setflags(write=False)
    return EmpiricalCdf(sorted_scores)


def min_cdf_build(score_lists):
    cdfs = tuple(ecdf_build(scores) for scores in score_lists)
    if not cdfs:
        raise EmptyInput("At least one source domain is required")
    return MinCdf(cdfs)


@dataclass(frozen=True, eq=False)
class CalibrationBundle:
    """
    Per-domain calibration scores V_ij, one vector per source domain.
    """
    domain_scores: tuple

    def __post_init__(self):
        if len(self.domain_scores) == 0:
            raise EmptyInput("A calibration bundle needs at least one source domain")
        checked = tuple(_validated_array(scores) for scores in self.domain_scores)
        object.__setattr__(self, 'domain_scores', checked)

    @classmethod
    def from_lists(cls, score_lists):
        return cls(tuple(score_lists))

    @property
    def ms(self):
        return tuple(len(scores) for scores in self.domain_scores)

    @property
    def d(self):
        return len(self.domain_scores)

    def min_cdf(self):
        return min_cdf_build(self.domain_scores)

    def pooled(self):
        return np.concatenate(self.domain_scores)


def cdf_eval(cdf, x):
    """
    Evaluates an EmpiricalCdf or MinCdf at x (scalar or array).
    """
    value = cdf(x)
    return float(value) if np.ndim(value) == 0 else value


def quantile(cdf, beta):
    """
    Q(beta; F) = inf{ s : F(s) >= beta }.

    beta <= 0 gives -inf and any beta > 1 gives +inf (no attainable level);
    +inf means the full prediction set. Levels in (0, 1] are lowered by
    config.LEVEL_TOLERANCE before the search so that rounding in beta never
    moves the answer up by a whole order statistic.
    """
    if beta <= 0:
        return -math.inf
    if beta > 1.0:
        return math.inf
    target = beta - config.LEVEL_TOLERANCE

    if isinstance(cdf, EmpiricalCdf):
        rank = max(math.ceil(target * cdf.m), 1)
        return float(cdf.sorted_scores[rank - 1])

    atoms = cdf.atoms
    levels = cdf(atoms)
    hits = np.flatnonzero(levels >= target)
    if hits.size == 0:
        return math.inf
    return float(atoms[hits[0]])


def dkw_failure_bound(ms, epsilon):
    """
    delta = 2 sum_i exp(-2 m_i epsilon^2), the probability that the
    empirical minimum CDF strays more than epsilon from the true one.

    Terms below config.DKW_UNDERFLOW_FLOOR are treated as 0. The value
    is not capped at 1.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    ms = np.asarray(ms, dtype=float)
    if ms.size == 0 or np.any(ms < 1):
        raise ValueError("Every sample count must be at least 1")
    terms = np.exp(-2.0 * ms * epsilon * epsilon)
    terms[terms < config.DKW_UNDERFLOW_FLOOR] = 0.0
    return float(2.0 * terms.sum())


# Example Usage
if __name__ == '__main__':
    fmin = min_cdf_build([[1, 2, 3, 4], [2, 4, 6, 8]])
    print(f"F_min(4)       = {cdf_eval(fmin, 4)}")
    print(f"Q(0.75; F_min) = {quantile(fmin, 0.75)}")
    print(f"DKW([1000], .05) = {dkw_failure_bound([1000], 0.05):.7f}")
