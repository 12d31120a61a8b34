"""Exception hierarchy shared by every module in the package."""


class FloquetError(Exception):
    """Base class for all package errors."""


class DimensionError(FloquetError, ValueError):
    pass


class NumericError(FloquetError, ArithmeticError):
    pass


class ValidationError(FloquetError, ValueError):
    pass


class DomainError(ValidationError):
    pass


class AmbiguityError(FloquetError):
    """The periodic steady state is not unique."""


class ConvergenceError(FloquetError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class StiffnessError(FloquetError):
    pass


class TruncationError(FloquetError):
    pass


class SingularityError(FloquetError, ArithmeticError):
    pass


class FitError(FloquetError):
    """Fit did not converge; ``best`` holds the best-so-far result."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
