"""Exception hierarchy shared by all modules."""


class FluxonError(Exception):
    """Base class for library errors."""


class InvalidParameterError(FluxonError, ValueError):
    """A user-supplied parameter is outside its admissible range."""


class DomainError(FluxonError, ValueError):
    """A function was evaluated outside its domain."""


class NumericError(FluxonError, ArithmeticError):
    """A numerical procedure failed to converge or lost accuracy."""


class ConditioningError(NumericError):
    """A linear system exceeded the configured condition-number cap."""


class SeparatrixError(DomainError):
    """The requested point is too close to the separatrix x = +-x_crit."""


class ExcludedCurveError(DomainError):
    """The requested point lies on an excluded curve t = t_+-(x)."""


class ContinuationError(NumericError):
    """Newton continuation failed; the last good state is attached."""

    def __init__(self, message: str, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class ConfigError(FluxonError, ValueError):
    """A scenario configuration failed validation."""
