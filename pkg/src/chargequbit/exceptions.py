"""Exception types raised by chargequbit."""


class ChargeQubitError(Exception):
    """Base class for all package errors."""


class ValidationError(ChargeQubitError, ValueError):
    """An input violates a documented invariant.

    ``field`` names the offending parameter when one can be identified.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ChannelError(ValidationError):
    """A coupling channel was requested for an incompatible material or geometry."""


class BasisError(ValidationError):
    """A density matrix is expressed in the wrong basis for the requested operation."""


class ConfigError(ValidationError):
    """A sweep configuration could not be parsed or validated.

    ``line`` is the 1-based line number for syntax errors, else None.
    """

    def __init__(self, message, field=None, line=None):
        super().__init__(message, field=field)
        self.line = line


class NonConvergenceError(ChargeQubitError, ArithmeticError):
    """A numerical routine ran out of budget before meeting its tolerance.

    The best available estimate is kept on the exception so callers can
    still report it.
    """

    def __init__(self, message, estimate=float("nan"), error=float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
