"""Exception hierarchy shared by the analytic solver, simulator and CLI."""


class GixqError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(GixqError, ValueError):
    exit_code = 1


class StabilityError(GixqError):
    """The model has no stationary distribution (drift condition violated)."""

    exit_code = 2


class NumericalError(GixqError):
    """A numerical procedure could not deliver a trustworthy answer."""

    exit_code = 3


class LSTSingularityError(NumericalError, ZeroDivisionError):
    """LST evaluated at (or numerically on top of) one of its poles."""


class PadeError(NumericalError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class RootCountError(NumericalError):
    def __init__(self, message, found, expected, winding=None):
        super().__init__(message)
        self.found = found
        self.expected = expected
        self.winding = winding


class DegenerateSpectrumError(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass


class ConditioningError(NumericalError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class RefinementError(NumericalError):
    pass
