# -*- coding: utf-8 -*-
"""
Exception hierarchy for the toolkit.

Library code raises these; main.py catches OodcpError and maps it to an
exit code.
"""


class OodcpError(Exception):
    """Base class for all toolkit errors."""


class EmptyInput(OodcpError, ValueError):
    pass


class NonFiniteScore(OodcpError, ValueError):
    pass


class LengthMismatch(OodcpError, ValueError):
    pass


class NotNormalized(OodcpError, ValueError):
    pass


class NegativeThreshold(OodcpError, ValueError):
    pass


class EmptyCalibration(OodcpError, ValueError):
    pass


class UnknownFamily(OodcpError, KeyError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"Unknown divergence family '{self.name}' (expected one of chi2, tv, kl)"


class InfeasibleEpsilon(OodcpError, ValueError):
    """The DKW correction at this epsilon leaves the domain of g_inverse."""


class Infeasible(OodcpError):
    """No epsilon on the search grid gives a quantile level <= 1."""


class RankDeficient(OodcpError, ValueError):
    pass


class ConfigError(OodcpError, ValueError):
    """
    Raised once with every violated invariant of a configuration.
    """
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__(self.violations)

    def __str__(self):
        return "; ".join(self.violations)


class ScoreFileError(OodcpError, ValueError):
    def __init__(self, path, message, line=None):
        self.path = str(path)
        self.line = line
        self.message = message
        super().__init__(path, message, line)

    def __str__(self):
        where = f"{self.path}:{self.line}" if self.line is not None else self.path
        return f"{where}: {self.message}"


class TrialFailed(OodcpError):
    def __init__(self, seed, cause):
        self.seed = seed
        self.cause = cause
        super().__init__(seed, cause)

    def __str__(self):
        return f"Trial with seed {self.seed} failed: {self.cause}"
