"""Exception types shared across the package.

The CLI maps :class:`ConfigError` to exit code 2 and every
:class:`NumericalGuardError` to exit code 3.
"""


class ConfigError(ValueError):
    """Unparseable or inconsistent user input."""


class NumericalGuardError(ArithmeticError):
    """A numerical precondition (truncation, step size, grid size) failed."""


class TruncationError(NumericalGuardError):
    pass


class ZeroProjectionError(NumericalGuardError):
    """Conditional projection whose success probability is numerically zero."""

    def __init__(self, message, probability=0.0):
        super().__init__(message)
        self.probability = probability


class StepSizeError(NumericalGuardError):
    pass


class GridTooLargeError(NumericalGuardError):
    pass


class ConstraintError(ValueError):
    """Arguments outside the domain of a closed-form expression."""
