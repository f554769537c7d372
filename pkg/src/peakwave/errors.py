"""Exception hierarchy shared by the numerical modules and the CLI."""


class PeakwaveError(Exception):
    """Base class for all library errors."""


class DomainError(PeakwaveError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ConvergenceError(PeakwaveError):
    """An iterative procedure did not reach its tolerance.

    ``estimate`` carries the best value available when the iteration stopped.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class NoRootError(PeakwaveError):
    """No root of the period equation exists on the requested branch."""


class PreconditionError(PeakwaveError, ValueError):
    """Input data violates the documented precondition of an operation."""


class AmbiguityError(PeakwaveError):
    """An eigenvalue sits in the guard band around the zero tolerance."""


class BlowUpError(PeakwaveError):
    """The slope of the evolving profile exceeded the breaking guard."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t
