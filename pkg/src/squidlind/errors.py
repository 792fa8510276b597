"""Exception and warning types shared across the package."""


class SquidLindError(Exception):
    """Base class for all errors raised by squidlind."""


class NotHermitian(SquidLindError, ValueError):
    pass


class NoConvergence(SquidLindError, RuntimeError):
    pass


class DimMismatch(SquidLindError, ValueError):
    pass


class InvalidDevice(SquidLindError, ValueError):
    pass


class DegenerateMinor(SquidLindError, ArithmeticError):
    """The (S,S) cofactor vanishes, so det(a) does not constrain a_SS."""


class NotCompleted(SquidLindError, ValueError):
    pass


class OutOfBasis(SquidLindError, ValueError):
    """Requested state carries weight in the top of the truncated basis."""


class Diverged(SquidLindError, FloatingPointError):
    pass


class ConfigError(SquidLindError, ValueError):
    pass


class ParseError(ConfigError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ValidationError(ConfigError):
    def __init__(self, field, constraint):
        self.field = field
        self.constraint = constraint
        super().__init__(f"{field} must be {constraint}")


class GRangeWarning(UserWarning):
    """Coupling ratio outside the interval where minimal completion is PSD."""


class StabilityWarning(UserWarning):
    pass


class FDStepTooLarge(UserWarning):
    """Richardson estimate of the finite-difference error is too large."""
