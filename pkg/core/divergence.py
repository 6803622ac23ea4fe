# -*- coding: utf-8 -*-
"""
f-Divergence Families

This module defines the divergence generators used by the worst-case
quantile computations, together with the two-point objective h(z, beta)
that every worst-case computation reduces to.

All generators are normalised so that f(1) = 0, f'(1) = 0 and f >= 0;
this leaves the divergence unchanged.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

import config
from core.exceptions import LengthMismatch, NotNormalized, UnknownFamily


class FamilyKind(Enum):
    CHI_SQUARE = "chi2"
    TOTAL_VARIATION = "tv"
    KULLBACK_LEIBLER = "kl"
    CUSTOM = "custom"


@dataclass(frozen=True)
class DivergenceFamily:
    """
    An f-divergence generator.

    :param kind: Which family this is.
    :param f: The generator. Accepts scalars or numpy arrays, returns +inf for t < 0.
    :param f_prime_at_infinity: lim_{t -> inf} f(t) / t, possibly math.inf.
    :param name: Short name used on the command line and in reports.
    """
    kind: FamilyKind
    f: Callable
    f_prime_at_infinity: float
    name: str

    @property
    def has_closed_form_g(self):
        return self.kind in (FamilyKind.CHI_SQUARE, FamilyKind.TOTAL_VARIATION)


def _chi_square(t):
    t = np.asarray(t, dtype=float)
    return np.where(t < 0, np.inf, (t - 1.0) ** 2)


def _total_variation(t):
    t = np.asarray(t, dtype=float)
    return np.where(t < 0, np.inf, 0.5 * np.abs(t - 1.0))


def _kullback_leibler(t):
    # t log t - t + 1, with 0 log 0 = 0
    t = np.asarray(t, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        positive = np.where(t > 0, t * np.log(np.where(t > 0, t, 1.0)) - t + 1.0, 1.0)
    return np.where(t < 0, np.inf, positive)


CHI_SQUARE = DivergenceFamily(FamilyKind.CHI_SQUARE, _chi_square, math.inf, "chi2")
TOTAL_VARIATION = DivergenceFamily(FamilyKind.TOTAL_VARIATION, _total_variation, 0.5, "tv")
KULLBACK_LEIBLER = DivergenceFamily(FamilyKind.KULLBACK_LEIBLER, _kullback_leibler, math.inf, "kl")

FAMILIES = {family.name: family for family in (CHI_SQUARE, TOTAL_VARIATION, KULLBACK_LEIBLER)}


def family_from_name(name):
    """
    Looks up a built-in family by its command-line name ("chi2", "tv", "kl").
    """
    try:
        return FAMILIES[str(name).lower()]
    except KeyError:
        raise UnknownFamily(name) from None


def custom_family(name, f, f_prime_at_infinity):
    """
    Registers a user-supplied generator after spot-checking it on a grid.

    Checks f(1) = 0, f >= 0 and midpoint convexity on
    config.CONVEXITY_CHECK_POINTS equally spaced points of [0, 8].
    Convexity is only sampled, never proven.
    """
    grid = np.linspace(0.0, 8.0, config.CONVEXITY_CHECK_POINTS)
    values = np.asarray(f(grid), dtype=float)
    if abs(float(f(1.0))) > config.CONVEXITY_SLACK:
        raise ValueError(f"Generator '{name}' must satisfy f(1) = 0, got {float(f(1.0))}")
    if np.any(values < -config.CONVEXITY_SLACK):
        raise ValueError(f"Generator '{name}' must be non-negative on [0, inf)")
    second_diff = values[:-2] - 2.0 * values[1:-1] + values[2:]
    if np.any(second_diff < -2.0 * config.CONVEXITY_SLACK):
        raise ValueError(f"Generator '{name}' failed the convexity spot-check")
    if f_prime_at_infinity < 0:
        raise ValueError("f_prime_at_infinity must be non-negative for a normalised generator")
    return DivergenceFamily(FamilyKind.CUSTOM, f, float(f_prime_at_infinity), name)


def f_value(family, t):
    """
    Evaluates the generator at t; t < 0 gives +inf.
    """
    if t < 0:
        return math.inf
    return float(family.f(t))


def _perspective(family, numerator, denominator):
    # denominator * f(numerator / denominator) with its limits at denominator = 0
    if denominator > 0:
        return denominator * f_value(family, numerator / denominator)
    if numerator <= 0:
        return 0.0
    return numerator * family.f_prime_at_infinity


def h_objective(family, z, beta):
    """
    The two-point objective beta f(z/beta) + (1-beta) f((1-z)/(1-beta)).

    At beta = 0 or beta = 1 the perspective limits are used, and
    0 f(0/0) = 0 when z and beta vanish together.

    :param z: Level of the reweighted distribution, in [0, 1].
    :param beta: Level of the base distribution, in [0, 1].
    :return: A non-negative extended real.
    """
    return _perspective(family, z, beta) + _perspective(family, 1.0 - z, 1.0 - beta)


def perspective_array(family, numerator, denominator):
    """
    Elementwise denominator * f(numerator / denominator); where the
    denominator vanishes the limit numerator * f'(inf) is used.
    """
    numerator = np.asarray(numerator, dtype=float)
    denominator = np.broadcast_to(np.asarray(denominator, dtype=float), numerator.shape)
    result = np.zeros(numerator.shape)

    interior = denominator > 0
    ratio = numerator[interior] / denominator[interior]
    result[interior] = denominator[interior] * family.f(ratio)

    boundary = ~interior & (numerator > 0)
    result[boundary] = numerator[boundary] * family.f_prime_at_infinity
    return result


def divergence_between_discrete(family, p, q):
    """
    D_f(p || q) = sum_i q_i f(p_i / q_i) for probability vectors on the same atoms.

    p may also be a 2-D array holding one candidate distribution per row,
    in which case one divergence per row is returned.

    :raises LengthMismatch: if p and q live on different numbers of atoms.
    :raises NotNormalized: if a vector does not sum to 1 within tolerance.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape[-1] != q.shape[-1] or q.ndim != 1:
        raise LengthMismatch(f"Vectors of length {p.shape[-1]} and {q.shape[-1]}")
    if np.any(np.abs(p.sum(axis=-1) - 1.0) > config.NORMALIZATION_TOLERANCE) or \
            abs(q.sum() - 1.0) > config.NORMALIZATION_TOLERANCE:
        raise NotNormalized("Probability vectors must sum to 1")

    terms = perspective_array(family, p, q)
    total = terms.sum(axis=-1)
    return float(total) if total.ndim == 0 else total


# Example Usage
if __name__ == '__main__':
    print(f"KL f(1)      = {f_value(KULLBACK_LEIBLER, 1.0)}")
    print(f"chi2 f(2)    = {f_value(CHI_SQUARE, 2.0)}")
    print(f"h_tv(.3, .5) = {h_objective(TOTAL_VARIATION, 0.3, 0.5)}")
