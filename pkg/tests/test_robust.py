import math

import numpy as np
import pytest

from core.conformal import Interval, scp_threshold
from core.divergence import CHI_SQUARE, KULLBACK_LEIBLER, TOTAL_VARIATION, divergence_between_discrete
from core.empirical import CalibrationBundle, dkw_failure_bound, ecdf_build, quantile
from core.exceptions import ConfigError, Infeasible, InfeasibleEpsilon
from core.gcurve import GCurve, g
from core.robust import (RobustConfig, RobustPredictor, coverage_lower_bound, corrected_alpha,
                         epsilon_h, optimize_epsilon, robust_threshold, worst_case_quantile)


def _simplex_grid(step=0.005):
    n = round(1 / step)
    i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing='ij')
    keep = i + j <= n
    i, j = i[keep], j[keep]
    return np.stack([i, j, n - i - j], axis=1) / n


@pytest.fixture(scope='module')
def simplex():
    return _simplex_grid()


def _brute_min_cdf(family, rho, base, simplex):
    feasible = divergence_between_discrete(family, simplex, base) <= rho
    return np.cumsum(simplex[feasible], axis=1).min(axis=0)


@pytest.mark.parametrize("rho", [0.01, 0.1])
@pytest.mark.parametrize("family", [CHI_SQUARE, TOTAL_VARIATION])
def test_g_is_the_worst_case_over_a_single_ball(family, rho, simplex):
    base = np.array([0.2, 0.5, 0.3])
    levels = np.cumsum(base)
    worst = _brute_min_cdf(family, rho, base, simplex)
    curve = GCurve(family, rho)
    for k in range(2):
        assert worst[k] == pytest.approx(g(curve, float(levels[k])), abs=0.02)


@pytest.mark.parametrize("rho", [0.01, 0.1])
@pytest.mark.parametrize("family", [CHI_SQUARE, TOTAL_VARIATION])
def test_g_of_min_cdf_is_the_worst_case_over_the_hull(family, rho, simplex):
    p1 = np.array([0.5, 0.3, 0.2])
    p2 = np.array([0.2, 0.3, 0.5])
    worst = np.ones(3)
    for lam in np.linspace(0, 1, 101):
        worst = np.minimum(worst, _brute_min_cdf(family, rho, lam * p1 + (1 - lam) * p2, simplex))
    fmin = np.minimum(np.cumsum(p1), np.cumsum(p2))
    curve = GCurve(family, rho)
    for k in range(2):
        assert worst[k] == pytest.approx(g(curve, float(fmin[k])), abs=0.02)


def test_worst_case_quantile():
    cdf = ecdf_build(np.arange(1, 101))
    assert worst_case_quantile(cdf, TOTAL_VARIATION, 0.05, 0.9) == 95.0
    assert worst_case_quantile(cdf, TOTAL_VARIATION, 0.0, 0.9) == 90.0
    assert worst_case_quantile(cdf, TOTAL_VARIATION, 0.2, 0.9) == 100.0


def test_epsilon_h_examples():
    assert epsilon_h([10 ** 6], TOTAL_VARIATION, 0.05, 0.1, 0.5) == pytest.approx(1.45)
    assert epsilon_h([10000], TOTAL_VARIATION, 0.05, 0.1, 0.02) == pytest.approx(0.970604, abs=1e-6)
    assert epsilon_h([10], TOTAL_VARIATION, 0.05, 0.1, 0.01) == math.inf
    with pytest.raises(ValueError):
        epsilon_h([100], TOTAL_VARIATION, 0.05, 0.1, 0.0)


def test_optimize_epsilon_finds_the_grid_minimum():
    ms, grid = (10000,), 200
    epsilon, level = optimize_epsilon(ms, TOTAL_VARIATION, 0.05, 0.1, grid)
    grid_values = [epsilon_h(ms, TOTAL_VARIATION, 0.05, 0.1, k / grid) for k in range(1, grid + 1)]
    assert level <= min(grid_values) + 1e-12
    assert level == pytest.approx(epsilon_h(ms, TOTAL_VARIATION, 0.05, 0.1, epsilon))
    assert 0.95 < level <= 1.0
    assert optimize_epsilon(ms, TOTAL_VARIATION, 0.05, 0.1, grid) == (epsilon, level)


def test_optimize_epsilon_level_shrinks_with_sample_size():
    levels = [optimize_epsilon([m], TOTAL_VARIATION, 0.0, 0.1)[1] for m in (10 ** 4, 10 ** 6, 10 ** 8)]
    assert levels[0] > levels[1] > levels[2] > 0.9
    assert levels[2] < 0.902


def test_optimize_epsilon_infeasible():
    with pytest.raises(Infeasible):
        optimize_epsilon([10], TOTAL_VARIATION, 0.5, 0.05)
    with pytest.raises(Infeasible):
        optimize_epsilon([5], KULLBACK_LEIBLER, 0.5, 0.01)
    with pytest.raises(ValueError):
        optimize_epsilon([100], TOTAL_VARIATION, 0.05, 0.1, grid=2)


def test_corrected_alpha():
    assert corrected_alpha([10000], TOTAL_VARIATION, 0.05, 0.1, 0.02) == pytest.approx(0.079396, abs=1e-6)
    # lifted level beyond 1 saturates at the plateau of g
    assert corrected_alpha([10000], TOTAL_VARIATION, 0.05, 0.01, 0.06) == pytest.approx(0.05)
    with pytest.raises(InfeasibleEpsilon):
        corrected_alpha([10], TOTAL_VARIATION, 0.05, 0.1, 0.01)


def test_coverage_lower_bound():
    assert coverage_lower_bound([10000], TOTAL_VARIATION, 0.05, 0.1, 0.02) == pytest.approx(0.879410, abs=1e-6)
    assert coverage_lower_bound([10], TOTAL_VARIATION, 0.05, 0.1, 0.01) == 0.0
    assert coverage_lower_bound([10 ** 12], TOTAL_VARIATION, 0.0, 0.1, 1e-4) == pytest.approx(0.9, abs=1e-3)
    tighter = coverage_lower_bound([10000], TOTAL_VARIATION, 0.05, 0.1, 0.02, rho_star=0.01)
    assert tighter > coverage_lower_bound([10000], TOTAL_VARIATION, 0.05, 0.1, 0.02)
    with pytest.raises(InfeasibleEpsilon):
        coverage_lower_bound([100], TOTAL_VARIATION, 0.05, 0.1, 1.5)


def test_robust_config_collects_violations():
    with pytest.raises(ConfigError) as excinfo:
        RobustConfig(TOTAL_VARIATION, -1.0, 1.5, epsilon_grid=1)
    assert len(excinfo.value.violations) == 3


def test_robust_threshold_matches_manual_pipeline():
    scores = np.arange(1, 10001, dtype=float)
    bundle = CalibrationBundle.from_lists([scores])
    report = robust_threshold(bundle, RobustConfig(TOTAL_VARIATION, 0.05, 0.1))

    epsilon, level = optimize_epsilon([10000], TOTAL_VARIATION, 0.05, 0.1)
    assert report.feasible
    assert report.epsilon_star == epsilon
    assert report.quantile_level == level
    assert 0.95 < level <= 1.0
    assert report.threshold == quantile(ecdf_build(scores), level)
    assert report.threshold == float(math.ceil(10000 * level - 1e-8))
    assert report.corrected_alpha == pytest.approx(1 - g(GCurve(TOTAL_VARIATION, 0.05), min(level, 1.0)))
    assert report.dkw_delta == pytest.approx(dkw_failure_bound([10000], epsilon))
    assert report.ms == (10000,)
    assert report.family == "tv"


def test_robust_threshold_without_shift_approaches_scp():
    scores = np.arange(1, 1001, dtype=float)
    bundle = CalibrationBundle.from_lists([scores])
    report = robust_threshold(bundle, RobustConfig(TOTAL_VARIATION, 0.0, 0.1), ms_override=[10 ** 12])
    assert abs(report.threshold - scp_threshold(scores, 0.1)) <= 2


def test_robust_threshold_infeasible_gives_full_set():
    bundle = CalibrationBundle.from_lists([np.arange(1, 11, dtype=float)])
    report = robust_threshold(bundle, RobustConfig(TOTAL_VARIATION, 0.5, 0.05))
    assert report.threshold == math.inf
    assert not report.feasible
    assert report.epsilon_star is None and report.corrected_alpha is None
    assert report.to_dict()['ms'] == [10]


def test_robust_threshold_dominates_pooled_scp():
    rng = np.random.default_rng(8)
    sources = [rng.exponential(size=5000), rng.exponential(scale=1.3, size=5000)]
    bundle = CalibrationBundle.from_lists(sources)
    report = robust_threshold(bundle, RobustConfig(TOTAL_VARIATION, 0.05, 0.1))
    assert report.threshold >= scp_threshold(bundle.pooled(), 0.1)


def test_robust_threshold_monotone_in_rho_and_alpha():
    rng = np.random.default_rng(9)
    bundle = CalibrationBundle.from_lists([rng.exponential(size=10000)])
    by_rho = [robust_threshold(bundle, RobustConfig(CHI_SQUARE, rho, 0.1)).threshold
              for rho in (0.0, 0.01, 0.02, 0.05)]
    by_alpha = [robust_threshold(bundle, RobustConfig(CHI_SQUARE, 0.02, alpha)).threshold
                for alpha in (0.1, 0.15, 0.2)]
    assert all(a <= b for a, b in zip(by_rho, by_rho[1:]))
    assert all(a >= b for a, b in zip(by_alpha, by_alpha[1:]))


def test_robust_threshold_ms_override_matches_duplicated_source():
    scores = np.arange(1, 1001, dtype=float)
    robust_config = RobustConfig(TOTAL_VARIATION, 0.01, 0.2)
    twice = robust_threshold(CalibrationBundle.from_lists([scores, scores]), robust_config)
    once = robust_threshold(CalibrationBundle.from_lists([scores]), robust_config, ms_override=(1000, 1000))
    assert twice.threshold == once.threshold
    assert twice.quantile_level == once.quantile_level


def test_robust_predictor():
    bundle = CalibrationBundle.from_lists([np.arange(1, 10001, dtype=float)])
    predictor = RobustPredictor.fit(bundle, RobustConfig(TOTAL_VARIATION, 0.05, 0.1))
    assert predictor.threshold == predictor.report.threshold
    assert predictor.predict_interval(0.0) == Interval(-predictor.threshold, predictor.threshold)
