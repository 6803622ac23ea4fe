# -*- coding: utf-8 -*-
"""
Configuration file for the OOD conformal prediction toolkit.

Numeric tolerances, default search/grid sizes, simulation defaults and
output settings live here.
"""

# Numeric Tolerances
GCURVE_TOLERANCE = 1e-10  # Binary-search bracket width for g and g_inverse
MAX_GCURVE_TOLERANCE = 1e-4
LEVEL_TOLERANCE = 1e-12  # Slack when comparing a CDF value against a quantile level
NORMALIZATION_TOLERANCE = 1e-9  # Probability vectors must sum to 1 within this
CONVEXITY_SLACK = 1e-12
CONVEXITY_CHECK_POINTS = 64  # Grid used to spot-check custom generators
DKW_UNDERFLOW_FLOOR = 1e-300

# Robust Threshold Settings
EPSILON_GRID = 2000  # Default resolution of the epsilon search
MIN_EPSILON_GRID = 10

# Simulation Defaults (single-source, multi-source overrides in configs/)
SIM_DIMS = 5
SIM_B_STAR = 1.0
SIM_SIGMA_SX = 1.0
SIM_SIGMA_SY = 1.0
SIM_SIGMA_TY = 1.5
SIM_M_TRAIN = 2000
SIM_N_CALIB = 2000
SIM_M_TEST = 1000
SIM_N_TRIALS = 1000
SIM_ALPHAS = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3]
SIM_FAMILY = "kl"
SIM_RHO_MARGIN = 1.5  # rho = margin * rho_oracle when a config leaves rho unset
SIM_SEED = 2023
SIM_SUMMARY_QUANTILES = [0.05, 0.25, 0.5, 0.75]

# Generator identity recorded in output metadata
RNG_BIT_GENERATOR = "numpy.random.Philox"

# Quadrature for rho_oracle (chi2 / tv)
ORACLE_SCALE_SPAN = 12.0  # Integrate on [0, span * max scale]
ORACLE_PANELS = 10000
ORACLE_LOG_RATIO_CAP = 700.0  # log(p_t / p_s) above this treats p_s as zero

# Parallelism: number of trial workers, overridable from the environment
THREADS_ENV = "OODCP_THREADS"
DEFAULT_THREADS = 1

# Output Settings
SCHEMA_VERSION = 1
CSV_FLOAT_FORMAT = "%.17g"
RESULTS_HEADER = ['trial', 'alpha', 'method', 'coverage', 'length']

# Exit Codes
EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_INFEASIBLE = 3
