"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class WTCError(Exception):
    """Base class for all errors raised by :mod:`wtcrobust`."""


class DomainError(WTCError, ValueError):
    """An argument lies outside the domain of a function."""


class ConfigError(WTCError, ValueError):
    """Invalid tuning constants or study configuration."""


class DataError(WTCError, ValueError):
    """Input data could not be read or is unusable."""


class InsufficientDataError(DataError):
    """Too few usable observations for the requested estimator."""


class DegenerateError(WTCError, ArithmeticError):
    """A quantity is undefined for this input (zero denominator, constant sample...)."""


class NoRootError(WTCError, ArithmeticError):
    """An estimating equation has no sign change over the admissible bracket."""


class IntegrationError(WTCError, ArithmeticError):
    """A defining integral diverges or failed to converge."""


class StudyError(WTCError):
    """A Monte Carlo study exceeded its tolerated failure rate."""
