"""Exception hierarchy shared by the analysis modules."""


class ImpulsiveError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ImpulsiveError, ValueError):
    """A state or parameter lies outside the admissible domain."""


class EscapeError(ImpulsiveError):
    """A trajectory left the truncated domain ``[0, x_max]``."""

    def __init__(self, message: str, t: float | None = None, x: float | None = None):
        super().__init__(message)
        self.t = t
        self.x = x


class StepLimitError(ImpulsiveError):
    """The integrator exhausted its step budget."""


class HypothesisError(ImpulsiveError):
    """A structural hypothesis on the vector field fails (e.g. a non-hyperbolic zero)."""


class PreconditionError(ImpulsiveError, ValueError):
    """An operation was called outside its documented preconditions."""


class NotAFixedPointError(PreconditionError):
    """The supplied initial condition is not a fixed point of the pulsed time-omega map."""
