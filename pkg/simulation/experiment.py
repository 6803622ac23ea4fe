# -*- coding: utf-8 -*-
"""
Coverage Simulation Engine

Runs the single-source and multi-source studies: train OLS on the
sources, calibrate SCP and OOD-SCP thresholds on source scores, and
measure coverage and interval length on the shifted target domain.
"""

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field, fields
from functools import cached_property

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

import config
from core.conformal import interval_set, scp_threshold
from core.divergence import family_from_name
from core.empirical import CalibrationBundle
from core.exceptions import ConfigError, OodcpError, TrialFailed, UnknownFamily
from core.robust import RobustConfig, RobustPredictor
from simulation.data import (LinearModel, abs_residual_score, concat, fit_ols,
                             gen_sources, gen_target_mixture, make_rng)
from simulation.oracle import rho_oracle

METHOD_SCP = "scp"
METHOD_OOD = "ood_scp"


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Parameters of one simulation study. rho = None means
    rho_margin * rho_oracle(sigma_sy, sigma_ty, family).
    """
    dims: int = config.SIM_DIMS
    w_star: list = None
    b_star: float = config.SIM_B_STAR
    mu_list: list = None
    sigma_sx: float = config.SIM_SIGMA_SX
    sigma_sy: float = config.SIM_SIGMA_SY
    sigma_ty: float = config.SIM_SIGMA_TY
    target_mix: list = None
    m_train: int = config.SIM_M_TRAIN
    n_calib: int = config.SIM_N_CALIB
    m_test: int = config.SIM_M_TEST
    alpha_list: list = field(default_factory=lambda: list(config.SIM_ALPHAS))
    family: str = config.SIM_FAMILY
    rho: float = None
    rho_margin: float = config.SIM_RHO_MARGIN
    epsilon_grid: int = config.EPSILON_GRID
    n_trials: int = config.SIM_N_TRIALS
    seed: int = config.SIM_SEED

    def __post_init__(self):
        # Fill dimension-dependent defaults: w* = 1, single source at the origin
        if self.w_star is None:
            object.__setattr__(self, 'w_star', [1.0] * self.dims)
        if self.mu_list is None:
            object.__setattr__(self, 'mu_list', [[0.0] * self.dims])
        if self.target_mix is None:
            d = len(self.mu_list)
            object.__setattr__(self, 'target_mix', [1.0 / d] * d)
        violations = self.violations()
        if violations:
            raise ConfigError(violations)

    def violations(self):
        problems = []
        if self.dims < 1:
            problems.append(f"dims must be positive, got {self.dims}")
        if len(self.w_star) != self.dims:
            problems.append(f"w_star has length {len(self.w_star)}, expected {self.dims}")
        if len(self.mu_list) < 1:
            problems.append("mu_list needs at least one source mean")
        for i, mu in enumerate(self.mu_list):
            if len(mu) != self.dims:
                problems.append(f"mu_list[{i}] has length {len(mu)}, expected {self.dims}")
        for name in ('sigma_sx', 'sigma_sy', 'sigma_ty'):
            if not getattr(self, name) > 0:
                problems.append(f"{name} must be positive, got {getattr(self, name)}")
        if len(self.target_mix) != len(self.mu_list):
            problems.append(f"target_mix has {len(self.target_mix)} weights for {len(self.mu_list)} sources")
        if any(w < 0 for w in self.target_mix) or \
                abs(sum(self.target_mix) - 1.0) > config.NORMALIZATION_TOLERANCE:
            problems.append("target_mix must be non-negative and sum to 1")
        if self.m_train <= self.dims + 1:
            problems.append(f"m_train must exceed dims + 1 = {self.dims + 1}, got {self.m_train}")
        if self.n_calib < len(self.mu_list):
            problems.append(f"n_calib must give every source at least one score, got {self.n_calib}")
        if self.m_test < 1:
            problems.append(f"m_test must be positive, got {self.m_test}")
        if not self.alpha_list:
            problems.append("alpha_list must not be empty")
        if any(not 0 < a < 1 for a in self.alpha_list):
            problems.append(f"every alpha must lie in (0, 1), got {self.alpha_list}")
        try:
            family_from_name(self.family)
        except UnknownFamily as e:
            problems.append(str(e))
        if self.rho is not None and not self.rho >= 0:
            problems.append(f"rho must be non-negative, got {self.rho}")
        if not self.rho_margin > 0:
            problems.append(f"rho_margin must be positive, got {self.rho_margin}")
        if self.epsilon_grid < config.MIN_EPSILON_GRID:
            problems.append(f"epsilon_grid must be at least {config.MIN_EPSILON_GRID}, got {self.epsilon_grid}")
        if self.n_trials < 1:
            problems.append(f"n_trials must be positive, got {self.n_trials}")
        if not problems and self.rho is None and math.isnan(self.resolved_rho):
            problems.append(f"oracle radius is undefined for sigma_sy={self.sigma_sy}, sigma_ty={self.sigma_ty}")
        return problems

    @classmethod
    def from_dict(cls, values):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError([f"unknown configuration key '{key}'" for key in unknown])
        return cls(**values)

    @classmethod
    def from_json(cls, path):
        with open(path, 'r') as f:
            try:
                values = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError([f"{path}: invalid JSON ({e})"]) from None
        if not isinstance(values, dict):
            raise ConfigError([f"{path}: expected a JSON object"])
        return cls.from_dict(values)

    def to_dict(self):
        return asdict(self)

    @property
    def divergence(self):
        return family_from_name(self.family)

    @property
    def oracle_model(self):
        return LinearModel(np.asarray(self.w_star, dtype=float), float(self.b_star))

    @cached_property
    def resolved_rho(self):
        if self.rho is not None:
            return float(self.rho)
        return self.rho_margin * rho_oracle(self.sigma_sy, self.sigma_ty, self.divergence)


@dataclass
class TrialResult:
    """
    Per-alpha coverage and mean interval length of both methods on one trial.
    """
    alphas: tuple
    coverage_scp: dict
    coverage_ood: dict
    avg_length_scp: dict
    avg_length_ood: dict

    def rows(self, trial):
        for alpha in self.alphas:
            yield {'trial': trial, 'alpha': alpha, 'method': METHOD_SCP,
                   'coverage': self.coverage_scp[alpha], 'length': self.avg_length_scp[alpha]}
            yield {'trial': trial, 'alpha': alpha, 'method': METHOD_OOD,
                   'coverage': self.coverage_ood[alpha], 'length': self.avg_length_ood[alpha]}


def trial_seed(seed, index):
    """
    Seed sequence of one trial: child `index` of the experiment seed.
    """
    return np.random.SeedSequence(entropy=seed, spawn_key=(index,))


def _evaluate(prediction, y, threshold):
    interval = interval_set(prediction, threshold)
    coverage = float(np.mean(interval.contains(y)))
    length = math.inf if math.isinf(threshold) else float(np.mean(interval.length))
    return coverage, length


def run_trial(experiment, seed):
    """
    One replication: draw train, calibration and test sets, fit OLS on the
    training split only, and score both predictors on the target test set.

    :param experiment: ExperimentConfig.
    :param seed: int or SeedSequence for this trial's private stream.
    :return: TrialResult.
    """
    rng = make_rng(seed)
    model = fit_ols(concat(gen_sources(experiment, experiment.m_train, rng)))

    calibration = gen_sources(experiment, experiment.n_calib, rng)
    bundle = CalibrationBundle.from_lists([abs_residual_score(model, ds.x, ds.y) for ds in calibration])
    pooled = bundle.pooled()

    test = gen_target_mixture(experiment, experiment.m_test, rng)
    prediction = model.predict(test.x)

    alphas = tuple(experiment.alpha_list)
    result = TrialResult(alphas, {}, {}, {}, {})
    for alpha in alphas:
        scp_t = scp_threshold(pooled, alpha)
        result.coverage_scp[alpha], result.avg_length_scp[alpha] = _evaluate(prediction, test.y, scp_t)

        robust_config = RobustConfig(experiment.divergence, experiment.resolved_rho, alpha,
                                     experiment.epsilon_grid)
        ood = RobustPredictor.fit(bundle, robust_config)
        result.coverage_ood[alpha], result.avg_length_ood[alpha] = _evaluate(prediction, test.y, ood.threshold)
    return result


def _run_indexed(experiment, index):
    seed = trial_seed(experiment.seed, index)
    try:
        return run_trial(experiment, seed)
    except (OodcpError, np.linalg.LinAlgError) as e:
        raise TrialFailed(f"{experiment.seed}:{index}", e) from e


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    trials: list
    results: pd.DataFrame
    summary: pd.DataFrame

    def metadata(self):
        return {
            'schema_version': config.SCHEMA_VERSION,
            'seed': self.config.seed,
            'rng': config.RNG_BIT_GENERATOR,
            'numpy_version': np.__version__,
            'rho': self.config.resolved_rho,
            'config': self.config.to_dict(),
        }

    def summary_dict(self):
        report = self.metadata()
        report['summary'] = self.summary.to_dict(orient='records')
        return report


def results_frame(trials):
    rows = [row for index, trial in enumerate(trials) for row in trial.rows(index)]
    return pd.DataFrame(rows, columns=config.RESULTS_HEADER)


def summarize(frame):
    """
    Per (alpha, method): mean and quantiles of coverage and length, plus
    the number of trials that emitted the full prediction set.

    Quantiles take the lower order statistic so that infinite lengths
    never interpolate into nan.
    """
    records = []
    for (alpha, method), group in frame.groupby(['alpha', 'method'], sort=True):
        record = {'alpha': alpha, 'method': method, 'n_trials': len(group)}
        for column in ('coverage', 'length'):
            values = group[column]
            record[f'{column}_mean'] = float(values.mean())
            for q in config.SIM_SUMMARY_QUANTILES:
                record[f'{column}_q{int(round(q * 100)):02d}'] = float(values.quantile(q, interpolation='lower'))
        record['full_sets'] = int(np.isinf(group['length']).sum())
        records.append(record)
    return pd.DataFrame(records)


def thread_count():
    """Worker count from $OODCP_THREADS, falling back to the default on bad values."""
    raw = os.environ.get(config.THREADS_ENV)
    if raw is None:
        return config.DEFAULT_THREADS
    try:
        threads = int(raw)
    except ValueError:
        threads = 0
    if threads < 1:
        logging.warning(f"Ignoring {config.THREADS_ENV}={raw!r}: expected a positive integer, "
                        f"using {config.DEFAULT_THREADS}")
        return config.DEFAULT_THREADS
    return threads


def run_experiment(experiment, n_jobs=None, progress=True):
    """
    Runs experiment.n_trials independent trials and aggregates them.

    Trials draw from private streams derived from the experiment seed and
    are folded in trial-index order, so the result does not depend on
    n_jobs.

    :raises TrialFailed: naming the seed of the first failing trial.
    """
    n_jobs = thread_count() if n_jobs is None else n_jobs
    rho = experiment.resolved_rho
    logging.info(f"Running {experiment.n_trials} trials: {len(experiment.mu_list)} source(s), "
                 f"family={experiment.family}, rho={rho:.6f}, n_jobs={n_jobs}")

    indices = tqdm(range(experiment.n_trials), disable=not progress, desc="trials")
    trials = Parallel(n_jobs=n_jobs)(delayed(_run_indexed)(experiment, i) for i in indices)

    frame = results_frame(trials)
    summary = summarize(frame)
    logging.info("Simulation finished.")
    return ExperimentResult(experiment, trials, frame, summary)


# Example Usage
if __name__ == '__main__':
    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
    demo = ExperimentConfig(n_trials=5, m_train=500, n_calib=500, m_test=500)
    outcome = run_experiment(demo)
    print(outcome.summary.to_string())
