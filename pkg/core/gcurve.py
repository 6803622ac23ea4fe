# -*- coding: utf-8 -*-
"""
Level Distortion Curves

g(beta) is the lowest CDF level a distribution inside the f-divergence
ball of radius rho can reach where the base distribution sits at level
beta; g_inverse(tau) lifts a desired level back to the base level that
has to be read off the source CDF.

Chi-square and total variation use closed forms; every other family is
solved by bisection on the monotone branches of h(z, beta).
"""

import math
from dataclasses import dataclass, field

import config
from core.divergence import FamilyKind, h_objective
from core.exceptions import EmptyInput


@dataclass(frozen=True)
class GCurve:
    """
    The pair (g, g_inverse) for a fixed family and radius.

    :param family: A DivergenceFamily.
    :param rho: Divergence budget, rho >= 0.
    :param tolerance: Bracket width at which bisection stops.
    """
    family: object
    rho: float
    tolerance: float = field(default=config.GCURVE_TOLERANCE)

    def __post_init__(self):
        if not self.rho >= 0:
            raise ValueError(f"rho must be non-negative, got {self.rho}")
        if not 0 < self.tolerance <= config.MAX_GCURVE_TOLERANCE:
            raise ValueError(f"tolerance must lie in (0, {config.MAX_GCURVE_TOLERANCE}], got {self.tolerance}")


def _check_unit(name, value):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


def g_by_search(curve, beta):
    """
    inf{ z in [0, 1] : h(z, beta) <= rho } by bisection on [0, beta].

    h(., beta) is non-increasing on [0, beta] and vanishes at z = beta, so
    the feasible part of [0, beta] is an interval ending at beta. The
    returned value is the feasible end of the final bracket.
    """
    _check_unit("beta", beta)
    if beta == 0.0 or curve.rho == 0:
        return beta
    family, rho = curve.family, curve.rho
    if h_objective(family, 0.0, beta) <= rho:
        return 0.0

    lo, hi = 0.0, beta
    assert h_objective(family, hi, beta) <= rho
    while hi - lo > curve.tolerance:
        mid = 0.5 * (lo + hi)
        if h_objective(family, mid, beta) <= rho:
            hi = mid
        else:
            lo = mid
    return hi


def g_inverse_by_search(curve, tau):
    """
    sup{ beta in [tau, 1] : h(tau, beta) <= rho } by bisection on [tau, 1].

    h(tau, .) is non-decreasing on [tau, 1]; the returned value is the
    feasible end of the final bracket.
    """
    _check_unit("tau", tau)
    if tau == 1.0 or curve.rho == 0:
        return tau
    family, rho = curve.family, curve.rho
    if h_objective(family, tau, 1.0) <= rho:
        return 1.0

    lo, hi = tau, 1.0
    while hi - lo > curve.tolerance:
        mid = 0.5 * (lo + hi)
        if h_objective(family, tau, mid) <= rho:
            lo = mid
        else:
            hi = mid
    return lo


def _chi_square_g(rho, beta):
    return max(beta - math.sqrt(rho * beta * (1.0 - beta)), 0.0)


def _chi_square_g_inverse(rho, tau):
    # Largest root of (beta - tau)^2 = rho beta (1 - beta)
    b = 2.0 * tau + rho
    root = (b + math.sqrt(rho * (rho + 4.0 * tau * (1.0 - tau)))) / (2.0 * (1.0 + rho))
    return min(max(root, tau, rho / (rho + 1.0)), 1.0)


def g(curve, beta):
    """
    Worst-case CDF level inside the divergence ball at base level beta.

    :param curve: GCurve.
    :param beta: Base level in [0, 1].
    :return: g(beta) in [0, beta].
    """
    _check_unit("beta", beta)
    if curve.rho == 0:
        return beta
    if math.isinf(curve.rho):
        return 0.0
    kind = curve.family.kind
    if kind is FamilyKind.TOTAL_VARIATION:
        return max(beta - curve.rho, 0.0)
    if kind is FamilyKind.CHI_SQUARE:
        return _chi_square_g(curve.rho, beta)
    return g_by_search(curve, beta)


def g_inverse(curve, tau):
    """
    Base level that must be read off the source CDF to guarantee level tau
    under every distribution in the divergence ball.

    :param curve: GCurve.
    :param tau: Target level in [0, 1].
    :return: g_inverse(tau) in [tau, 1].
    """
    _check_unit("tau", tau)
    if curve.rho == 0 or tau == 1.0:
        return tau
    if math.isinf(curve.rho):
        return 1.0
    kind = curve.family.kind
    if kind is FamilyKind.TOTAL_VARIATION:
        return min(tau + curve.rho, 1.0)
    if kind is FamilyKind.CHI_SQUARE:
        return _chi_square_g_inverse(curve.rho, tau)
    return g_inverse_by_search(curve, tau)


def g_multi(curve, betas):
    """
    Multi-input g; the worst case over several base levels collapses to the
    smallest one.

    :raises EmptyInput: if betas is empty.
    """
    betas = list(betas)
    if not betas:
        raise EmptyInput("g_multi needs at least one level")
    return g(curve, min(betas))


def plateau_end(curve):
    """
    Largest beta with g(beta) = 0, i.e. g_inverse(0).
    """
    return g_inverse(curve, 0.0)


# Example Usage
if __name__ == '__main__':
    from core.divergence import CHI_SQUARE, KULLBACK_LEIBLER, TOTAL_VARIATION

    print(f"TV   g(0.5), rho=0.1        = {g(GCurve(TOTAL_VARIATION, 0.1), 0.5)}")
    print(f"chi2 g(0.9), rho=0.25       = {g(GCurve(CHI_SQUARE, 0.25), 0.9)}")
    print(f"KL   g_inverse(0.9), rho=.01 = {g_inverse(GCurve(KULLBACK_LEIBLER, 0.01), 0.9)}")
