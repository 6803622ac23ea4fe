# -*- coding: utf-8 -*-
"""
Main Application File for the OOD Conformal Prediction Toolkit

Sub-commands:
    gcurve     tabulate g and g_inverse for a divergence family and radius
    threshold  robust threshold from per-source calibration score files
    simulate   run a coverage simulation from a JSON config
    bound      finite-sample coverage bound and corrected alpha
"""

import argparse
import logging
import math
import os
import sys

import pandas as pd

import config
from core.divergence import family_from_name
from core.empirical import CalibrationBundle, dkw_failure_bound
from core.exceptions import ConfigError, Infeasible, InfeasibleEpsilon, OodcpError
from core.gcurve import GCurve, g, g_inverse
from core.robust import (RobustConfig, corrected_alpha, coverage_lower_bound,
                         epsilon_h, optimize_epsilon, robust_threshold)
from simulation.experiment import ExperimentConfig, run_experiment
from utils.logger import CsvLogger
from utils.report_io import save_report
from utils.score_io import read_scores


def _ensure_writable(path):
    """
    Fails before any computation if the output location cannot be written.
    """
    if path in (None, '-'):
        return
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
        raise ConfigError([f"output location '{path}' is not writable"])


def _unit_grid(step):
    count = math.ceil(1.0 / step - 1e-9)
    return [min(k * step, 1.0) for k in range(count + 1)]


def cmd_gcurve(args):
    """
    Writes the (beta, g, tau, g_inverse) table as CSV.
    """
    if not 0 < args.step <= 0.1:
        raise ConfigError([f"--step must lie in (0, 0.1], got {args.step}"])
    _ensure_writable(args.out)
    curve = GCurve(family_from_name(args.family), args.rho)

    grid = _unit_grid(args.step)
    table = pd.DataFrame({
        'beta': grid,
        'g': [g(curve, x) for x in grid],
        'tau': grid,
        'g_inverse': [g_inverse(curve, x) for x in grid],
    })
    target = sys.stdout if args.out in (None, '-') else args.out
    table.to_csv(target, index=False, float_format=config.CSV_FLOAT_FORMAT, lineterminator='\n')
    logging.info(f"g-curve table with {len(grid)} rows written for {args.family}, rho={args.rho}")
    return config.EXIT_OK


def cmd_threshold(args):
    """
    Computes the robust threshold from one score file per source domain.
    """
    _ensure_writable(args.out)
    robust_config = RobustConfig(family_from_name(args.family), args.rho, args.alpha, args.epsilon_grid)
    bundle = CalibrationBundle.from_lists([read_scores(path) for path in args.scores])

    ms_override = None
    if args.m_override:
        ms_override = args.m_override * bundle.d if len(args.m_override) == 1 else args.m_override
        if len(ms_override) != bundle.d:
            raise ConfigError([f"--m-override needs 1 or {bundle.d} values, got {len(args.m_override)}"])

    report = robust_threshold(bundle, robust_config, ms_override=ms_override)
    save_report(report.to_dict(), args.out)
    if not report.feasible:
        return config.EXIT_INFEASIBLE
    logging.info(f"Robust threshold: {report.threshold} at level {report.quantile_level:.6f}")
    return config.EXIT_OK


def cmd_simulate(args):
    """
    Runs a simulation and writes results.csv and summary.json to --out.
    """
    experiment = ExperimentConfig.from_json(args.config)
    overrides = {}
    if args.seed is not None:
        overrides['seed'] = args.seed
    if args.n_trials is not None:
        overrides['n_trials'] = args.n_trials
    if overrides:
        experiment = ExperimentConfig.from_dict({**experiment.to_dict(), **overrides})

    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, 'results.csv')
    summary_path = os.path.join(args.out, 'summary.json')
    _ensure_writable(csv_path)

    outcome = run_experiment(experiment, progress=not args.quiet)

    results_logger = CsvLogger(file_path=csv_path, header=config.RESULTS_HEADER)
    results_logger.log_many(outcome.results.to_dict(orient='records'))
    save_report(outcome.summary_dict(), summary_path)
    return config.EXIT_OK


def cmd_bound(args):
    """
    Reports epsilon, delta, the coverage lower bound and the corrected alpha.
    """
    _ensure_writable(args.out)
    if not args.ms or any(m < 1 for m in args.ms):
        raise ConfigError(["--ms needs one or more positive integers"])
    family = family_from_name(args.family)
    RobustConfig(family, args.rho, args.alpha, args.epsilon_grid)
    report = {'ms': list(args.ms), 'family': family.name, 'rho': args.rho, 'alpha': args.alpha}

    try:
        if args.epsilon is None:
            epsilon, level = optimize_epsilon(args.ms, family, args.rho, args.alpha, args.epsilon_grid)
        else:
            epsilon, level = args.epsilon, epsilon_h(args.ms, family, args.rho, args.alpha, args.epsilon)
        alpha_prime = corrected_alpha(args.ms, family, args.rho, args.alpha, epsilon)
    except (Infeasible, InfeasibleEpsilon) as e:
        logging.warning(f"{e}")
        report.update({'feasible': False, 'epsilon_star': args.epsilon, 'delta': None,
                       'quantile_level': None, 'coverage_lower_bound': None, 'corrected_alpha': None})
        save_report(report, args.out)
        return config.EXIT_INFEASIBLE

    report.update({
        'feasible': bool(level <= 1.0),
        'epsilon_star': epsilon,
        'delta': dkw_failure_bound(args.ms, epsilon),
        'quantile_level': level,
        'coverage_lower_bound': coverage_lower_bound(args.ms, family, args.rho, args.alpha, epsilon),
        'corrected_alpha': alpha_prime,
    })
    save_report(report, args.out)
    return config.EXIT_OK if report['feasible'] else config.EXIT_INFEASIBLE


def build_parser():
    parser = argparse.ArgumentParser(description="Conformal prediction under f-divergence distribution shift.")
    parser.add_argument('--verbose', action='store_true', help="Log at DEBUG level.")
    subparsers = parser.add_subparsers(dest='command', required=True)

    def add_divergence_flags(sub, alpha=True):
        sub.add_argument('--family', type=str, default=config.SIM_FAMILY, help="chi2 | tv | kl")
        sub.add_argument('--rho', type=float, required=True, help="Radius of the divergence ball.")
        if alpha:
            sub.add_argument('--alpha', type=float, required=True, help="Target miscoverage level.")
            sub.add_argument('--epsilon-grid', type=int, default=config.EPSILON_GRID,
                             help="Resolution of the epsilon search.")
        sub.add_argument('--out', type=str, default=None, help="Output file (default: stdout).")

    gcurve_parser = subparsers.add_parser('gcurve', help="Tabulate g and g_inverse as CSV.")
    add_divergence_flags(gcurve_parser, alpha=False)
    gcurve_parser.add_argument('--step', type=float, default=0.01, help="Grid step in (0, 0.1].")
    gcurve_parser.set_defaults(handler=cmd_gcurve)

    threshold_parser = subparsers.add_parser('threshold', help="Robust threshold from score files.")
    add_divergence_flags(threshold_parser)
    threshold_parser.add_argument('--scores', action='append', required=True,
                                  help="Score file of one source domain (repeatable).")
    threshold_parser.add_argument('--m-override', type=int, nargs='+', default=None,
                                  help="Sample sizes used in the DKW correction instead of the file sizes.")
    threshold_parser.set_defaults(handler=cmd_threshold)

    simulate_parser = subparsers.add_parser('simulate', help="Run a coverage simulation.")
    simulate_parser.add_argument('--config', type=str, required=True, help="Experiment config (JSON).")
    simulate_parser.add_argument('--out', type=str, default='.', help="Output directory.")
    simulate_parser.add_argument('--seed', type=int, default=None, help="Override the config seed.")
    simulate_parser.add_argument('--n-trials', type=int, default=None, help="Override the number of trials.")
    simulate_parser.add_argument('--quiet', action='store_true', help="Hide the progress bar.")
    simulate_parser.set_defaults(handler=cmd_simulate)

    bound_parser = subparsers.add_parser('bound', help="Coverage bound and corrected alpha.")
    add_divergence_flags(bound_parser)
    bound_parser.add_argument('--ms', type=int, nargs='+', required=True, help="Calibration size per source.")
    bound_parser.add_argument('--epsilon', type=float, default=None, help="Fixed epsilon (optimised if omitted).")
    bound_parser.set_defaults(handler=cmd_bound)
    return parser


def main(argv=None):
    """
    Parses the command line and dispatches to a sub-command.

    :return: Process exit code (0 ok, 2 input error, 3 infeasible).
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format='%(asctime)s - %(levelname)s - %(message)s')
    try:
        return args.handler(args)
    except (OodcpError, ValueError, OSError) as e:
        logging.error(f"{e}")
        return config.EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
