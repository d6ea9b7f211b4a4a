"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class InfoLossError(Exception):
    """Base class for all errors raised by :mod:`infoloss`."""


class InvalidPmfError(InfoLossError, ValueError):
    """A probability vector has negative entries or does not sum to one."""


class DomainError(InfoLossError, ValueError):
    """An argument lies outside the domain of the operation."""


class VariantError(InfoLossError, TypeError):
    """The operation does not support this distribution variant."""


class ConfigurationError(InfoLossError, ValueError):
    """Missing or inconsistent configuration (e.g. no tail-truncation policy)."""


class ToleranceNotMetError(InfoLossError, ArithmeticError):
    """A numerical routine did not reach its tolerance.

    The best available estimate is kept in :attr:`estimate` together with the
    error estimate :attr:`error`.
    """

    def __init__(self, message: str, estimate: float = float("nan"), error: float = float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class NumericError(InfoLossError, ArithmeticError):
    """Root finding or another numeric kernel failed."""


class SingularDerivativeError(NumericError):
    """A branch derivative is (numerically) zero where a density is required."""


class ConditioningOnNullError(InfoLossError, ValueError):
    """Conditioning on an output value with zero density."""


class CompositionDomainError(InfoLossError, ValueError):
    """The image of the inner map leaves the domain of the outer map."""


class UnsupportedClassError(InfoLossError, ValueError):
    """A piece class outside the supported set was supplied."""


class InconsistentDimensionsError(InfoLossError, ValueError):
    """Dimension arguments violate a required ordering."""


class ConsistencyError(InfoLossError, RuntimeError):
    """Two independent computational routes disagree beyond tolerance."""


class AmbiguousRootError(NumericError):
    """A spectral bin is zero, so its i-th roots do not have a well-defined phase."""
