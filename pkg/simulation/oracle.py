# -*- coding: utf-8 -*-
"""
Oracle Divergence Between Score Laws

With a well-fitted linear model the absolute-residual score is half-normal
with the noise scale of its domain. rho_oracle gives D_f(target || source)
between those half-normal laws, a reference radius for simulations.
"""

import math

import numpy as np
from scipy.integrate import simpson
from scipy.stats import halfnorm

import config
from core.divergence import FamilyKind, perspective_array


def _kl_half_normal(sigma_s, sigma_t):
    return math.log(sigma_s / sigma_t) + sigma_t ** 2 / (2.0 * sigma_s ** 2) - 0.5


def _quadrature(family, sigma_s, sigma_t):
    upper = config.ORACLE_SCALE_SPAN * max(sigma_s, sigma_t)
    x = np.linspace(0.0, upper, config.ORACLE_PANELS + 1)
    log_source = halfnorm.logpdf(x, scale=sigma_s)
    log_target = halfnorm.logpdf(x, scale=sigma_t)
    # Source density counts as zero where the ratio would overflow; the
    # perspective then takes p_t * f'(inf) there.
    source = np.where(log_target - log_source > config.ORACLE_LOG_RATIO_CAP, 0.0, np.exp(log_source))
    integrand = perspective_array(family, np.exp(log_target), source)
    return float(simpson(integrand, x=x))


def rho_oracle(sigma_sy, sigma_ty, family):
    """
    D_f(target score law || source score law) for half-normal scores.

    KL uses the closed form. Chi-square is +inf when sigma_ty^2 >= 2 sigma_sy^2
    (the integral diverges); otherwise it and every other family are
    integrated numerically on [0, 12 max(sigma)].

    :param sigma_sy: Source noise scale.
    :param sigma_ty: Target noise scale.
    :param family: DivergenceFamily.
    """
    if sigma_sy <= 0 or sigma_ty <= 0:
        raise ValueError("Both noise scales must be positive")
    if sigma_sy == sigma_ty:
        return 0.0
    if family.kind is FamilyKind.KULLBACK_LEIBLER:
        return _kl_half_normal(sigma_sy, sigma_ty)
    if family.kind is FamilyKind.CHI_SQUARE and sigma_ty ** 2 >= 2.0 * sigma_sy ** 2:
        return math.inf
    return max(_quadrature(family, sigma_sy, sigma_ty), 0.0)


# Example Usage
if __name__ == '__main__':
    from core.divergence import KULLBACK_LEIBLER, TOTAL_VARIATION

    print(f"KL(1.5 || 1) = {rho_oracle(1.0, 1.5, KULLBACK_LEIBLER):.6f}")
    print(f"TV(1.5 || 1) = {rho_oracle(1.0, 1.5, TOTAL_VARIATION):.6f}")
