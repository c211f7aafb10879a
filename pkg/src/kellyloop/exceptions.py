"""
Exception hierarchy for kellyloop.
All exceptions are designed to fail fast with clear error messages.
"""

from __future__ import annotations


class KellyLoopException(Exception):
    """Base exception - fail fast on all errors."""

    pass


class InvalidParameterError(KellyLoopException, ValueError):
    """Non-finite or out-of-domain numeric input."""

    pass


class InvalidProbabilityError(InvalidParameterError):
    """Probabilities outside (0, 1) or not summing to one."""

    pass


class NoEdgeError(InvalidParameterError):
    """A bet with p <= q has no positive Kelly fraction."""

    pass


class DegenerateStateError(KellyLoopException):
    """Portfolio state with a zero price or a broken value identity."""

    pass


class DegenerateExponentError(KellyLoopException):
    """Exponent configuration with no well-defined answer (psi convexity, gamma == 1)."""

    pass


class DynamicsBreakdownError(KellyLoopException):
    """The feedback loop drove the price to zero or below."""

    pass


class NoSolutionError(KellyLoopException):
    """Option matching has no solution for the given market data."""

    pass


class UnboundedSolutionError(NoSolutionError):
    """The matching root lies beyond the solver cap."""

    pass


class ConfigurationException(KellyLoopException):
    """Invalid configuration or setup errors."""

    pass
