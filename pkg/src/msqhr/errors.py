"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input failed a structural or numerical precondition."""


class DomainError(ValueError):
    """Argument lies outside the mathematical domain of a function."""


class ConsistencyError(RuntimeError):
    """An internal numerical consistency check failed."""


class IntegrationError(RuntimeError):
    """The ODE integrator could not advance.

    Attributes:
        time: integration time at which the failure was detected.
    """

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class UnsupportedModeError(ValueError):
    """The requested realization mode cannot express the request."""


class NoSolutionError(ValueError):
    """A design problem has no solution under the given constraints."""


class FarOffValidityWarning(UserWarning):
    """Detuning is too small for adiabatic elimination to be trusted."""
