"""Exception and warning types raised across the package."""


class WpcnError(Exception):
    """Base class for all package errors."""


class DomainError(WpcnError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class DegenerateTimeError(DomainError):
    """The harvesting fraction leaves no harvesting or no transmission time."""


class HighSnrFormulaInvalid(DomainError):
    """A high-SNR closed form has no real solution at this operating point."""


class NumericFailure(WpcnError, ArithmeticError):
    """An iterative routine did not converge.

    Attributes
    ----------
    partial : float or None
        Best estimate available when the routine gave up.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ConfigError(WpcnError, ValueError):
    """A sweep configuration is malformed or violates an invariant."""


class LowSnrWarning(RuntimeWarning):
    """A high-SNR asymptote evaluated to a negative throughput."""
