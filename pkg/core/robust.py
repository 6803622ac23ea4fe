# -*- coding: utf-8 -*-
"""
Distributionally Robust Conformal Thresholds

The OOD-SCP predictor: the worst-case quantile over every target inside
an f-divergence ball around the convex hull of the source score laws,
read off the empirical minimum CDF with a DKW finite-sample correction.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar

import config
from core.conformal import interval_set
from core.empirical import dkw_failure_bound, quantile
from core.exceptions import ConfigError, Infeasible, InfeasibleEpsilon
from core.gcurve import GCurve, g, g_inverse


@dataclass(frozen=True)
class RobustConfig:
    """
    :param family: DivergenceFamily of the ambiguity set.
    :param rho: Radius of the ambiguity set.
    :param alpha: Target miscoverage in (0, 1).
    :param epsilon_grid: Resolution of the epsilon search.
    """
    family: object
    rho: float
    alpha: float
    epsilon_grid: int = field(default=config.EPSILON_GRID)

    def __post_init__(self):
        violations = []
        if not self.rho >= 0:
            violations.append(f"rho must be non-negative, got {self.rho}")
        if not 0 < self.alpha < 1:
            violations.append(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.epsilon_grid < config.MIN_EPSILON_GRID:
            violations.append(f"epsilon_grid must be at least {config.MIN_EPSILON_GRID}, got {self.epsilon_grid}")
        if violations:
            raise ConfigError(violations)

    @property
    def curve(self):
        return GCurve(self.family, self.rho)


@dataclass(frozen=True)
class RobustThresholdReport:
    """
    Everything needed to audit a robust threshold.

    threshold is +inf and feasible is False when no epsilon gives a
    quantile level <= 1; the epsilon-dependent fields are then None.
    """
    threshold: float
    epsilon_star: float
    corrected_alpha: float
    dkw_delta: float
    quantile_level: float
    feasible: bool
    alpha: float
    rho: float
    family: str
    ms: tuple

    def to_dict(self):
        report = asdict(self)
        report['ms'] = list(self.ms)
        return report


def _ms_key(ms):
    return tuple(int(m) for m in ms)


def worst_case_quantile(fmin, family, rho, level):
    """
    Q(g_inverse(level); F_min): the largest level-quantile over the ambiguity set.
    """
    return quantile(fmin, g_inverse(GCurve(family, rho), level))


def epsilon_h(ms, family, rho, alpha, epsilon):
    """
    h(eps) = eps + g_inverse((1 - alpha) / (1 - delta(eps))).

    Returns +inf when delta >= 1 or when the lifted level exceeds 1.
    Values above 1 are returned as they are; they are infeasible.
    """
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    delta = dkw_failure_bound(ms, epsilon)
    if delta >= 1:
        return math.inf
    target = (1.0 - alpha) / (1.0 - delta)
    if target > 1:
        return math.inf
    return epsilon + g_inverse(GCurve(family, rho), target)


@lru_cache(maxsize=256)
def _optimize_epsilon_cached(ms, family, rho, alpha, grid):
    epsilons = np.arange(1, grid + 1) / grid
    values = np.array([epsilon_h(ms, family, rho, alpha, eps) for eps in epsilons])
    feasible = values <= 1.0
    if not np.any(feasible):
        raise Infeasible(
            f"No epsilon on a {grid}-point grid gives a quantile level <= 1 "
            f"(ms={list(ms)}, family={family.name}, rho={rho}, alpha={alpha})"
        )
    candidates = np.where(feasible, values, np.inf)
    best = int(np.argmin(candidates))
    best_eps, best_level = float(epsilons[best]), float(values[best])

    # One bounded refinement inside the neighbouring grid cells
    lower = epsilons[best - 1] if best > 0 else epsilons[best] / 2.0
    upper = epsilons[min(best + 1, grid - 1)]

    def objective(eps):
        value = epsilon_h(ms, family, rho, alpha, eps)
        return value if math.isfinite(value) else 2.0

    refined = minimize_scalar(objective, bounds=(lower, upper), method='bounded',
                              options={'xatol': 1e-9})
    if refined.success and 0 < refined.x <= 1:
        level = epsilon_h(ms, family, rho, alpha, float(refined.x))
        if level < best_level and level <= 1.0:
            best_eps, best_level = float(refined.x), level
    return best_eps, best_level


def optimize_epsilon(ms, family, rho, alpha, grid=config.EPSILON_GRID):
    """
    Minimises h(eps) over the grid {k / grid : k = 1..grid} subject to
    h(eps) <= 1, then refines once inside the neighbouring cells.

    Results are cached: they depend only on the sample sizes and the
    configuration, never on the scores themselves.

    :return: (epsilon_star, level) with level = h(epsilon_star).
    :raises Infeasible: if no grid point is feasible.
    """
    if grid < config.MIN_EPSILON_GRID:
        raise ValueError(f"grid must be at least {config.MIN_EPSILON_GRID}, got {grid}")
    return _optimize_epsilon_cached(_ms_key(ms), family, float(rho), float(alpha), int(grid))


def corrected_alpha(ms, family, rho, alpha, epsilon):
    """
    alpha' = 1 - g(eps + g_inverse((1 - alpha) / (1 - delta))).

    :raises InfeasibleEpsilon: if delta >= 1 or the lifted level leaves [0, 1].
    """
    level = epsilon_h(ms, family, rho, alpha, epsilon)
    if not math.isfinite(level):
        raise InfeasibleEpsilon(f"epsilon={epsilon} is infeasible for ms={list(ms)}")
    return 1.0 - g(GCurve(family, rho), min(level, 1.0))


def coverage_lower_bound(ms, family, rho, alpha_level, epsilon, rho_star=None):
    """
    (1 - delta) g_{rho_star}(g_inverse_rho(1 - alpha) - eps), clamped to [0, 1].

    rho_star is the true divergence of the target; it is unobservable in
    practice so rho is used in its place unless a simulation supplies it.

    :raises InfeasibleEpsilon: if epsilon is outside (0, 1].
    """
    if not 0 < epsilon <= 1:
        raise InfeasibleEpsilon(f"epsilon must lie in (0, 1], got {epsilon}")
    delta = dkw_failure_bound(ms, epsilon)
    if delta >= 1:
        return 0.0
    outer = GCurve(family, rho if rho_star is None else rho_star)
    inner = g_inverse(GCurve(family, rho), 1.0 - alpha_level) - epsilon
    bound = (1.0 - delta) * g(outer, min(max(inner, 0.0), 1.0))
    return min(max(bound, 0.0), 1.0)


def robust_threshold(bundle, robust_config, ms_override=None):
    """
    Runs the full correction pipeline on a calibration bundle.

    :param bundle: CalibrationBundle with one score vector per source.
    :param robust_config: RobustConfig.
    :param ms_override: Sample sizes to use in the DKW correction instead of
                        the bundle's own (what-if analysis).
    :return: RobustThresholdReport; infeasible configurations yield a
             +inf threshold with feasible=False.
    """
    ms = _ms_key(ms_override if ms_override is not None else bundle.ms)
    family, rho, alpha = robust_config.family, robust_config.rho, robust_config.alpha
    fmin = bundle.min_cdf()

    try:
        epsilon_star, level = optimize_epsilon(ms, family, rho, alpha, robust_config.epsilon_grid)
    except Infeasible as e:
        logging.warning(f"{e}. Emitting the full prediction set.")
        return RobustThresholdReport(math.inf, None, None, None, None, False,
                                     alpha, rho, family.name, ms)

    threshold = quantile(fmin, level)
    alpha_prime = 1.0 - g(robust_config.curve, min(level, 1.0))
    if alpha_prime > alpha:
        logging.warning(f"Corrected alpha {alpha_prime:.6f} exceeds the nominal alpha {alpha}.")
    return RobustThresholdReport(
        threshold=threshold,
        epsilon_star=epsilon_star,
        corrected_alpha=alpha_prime,
        dkw_delta=dkw_failure_bound(ms, epsilon_star),
        quantile_level=level,
        feasible=True,
        alpha=alpha,
        rho=rho,
        family=family.name,
        ms=ms,
    )


@dataclass(frozen=True, eq=False)
class RobustPredictor:
    """
    An OOD-SCP predictor fitted on a calibration bundle.
    """
    report: RobustThresholdReport

    @classmethod
    def fit(cls, bundle, robust_config, ms_override=None):
        return cls(robust_threshold(bundle, robust_config, ms_override))

    @property
    def threshold(self):
        return self.report.threshold

    def predict_interval(self, model_prediction):
        return interval_set(model_prediction, self.threshold)


# Example Usage
if __name__ == '__main__':
    from core.divergence import TOTAL_VARIATION

    print(f"h(0.02)        = {epsilon_h([10000], TOTAL_VARIATION, 0.05, 0.1, 0.02):.6f}")
    print(f"alpha'         = {corrected_alpha([10000], TOTAL_VARIATION, 0.05, 0.1, 0.02):.6f}")
    print(f"coverage bound = {coverage_lower_bound([10000], TOTAL_VARIATION, 0.05, 0.1, 0.02):.6f}")
