"""Exception hierarchy."""


class CompressibleError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(CompressibleError, ValueError):
    """An argument lies outside the domain of the operation."""


class SaturationError(CompressibleError, ArithmeticError):
    """A quantile is too far in the tail to represent as a float."""


class ConditioningError(CompressibleError, ArithmeticError):
    """A matrix is numerically rank deficient."""

    def __init__(self, message, rank=None):
        super().__init__(message)
        self.rank = rank


class UnsupportedError(CompressibleError, NotImplementedError):
    """No closed form is available for the requested parameters."""
