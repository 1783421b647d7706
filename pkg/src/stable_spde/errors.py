"""Exception hierarchy shared by all modules."""


class StableSPDEError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(StableSPDEError, ValueError):
    """A parameter lies outside its admissible domain."""


class DomainError(StableSPDEError, ValueError):
    """A function was evaluated outside the set where it is defined."""


class NumericalError(StableSPDEError, ArithmeticError):
    """A quadrature or iterative scheme failed to meet its tolerance.

    ``achieved`` carries the error estimate that was reached, when known.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class InputError(StableSPDEError, ValueError):
    """Malformed input data (unsorted grids, empty samples, bad config)."""
