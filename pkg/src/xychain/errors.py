"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """An input violates a documented precondition."""


class PoleError(InvalidArgument):
    """Evaluation requested exactly at a pole (e.g. Hurwitz zeta at s = 1)."""


class SingularityError(ArithmeticError):
    """A bosonic factor 1/(1 - exp(x)) or log(1 - exp(x)) hit x = 0."""


class AccuracyFailure(RuntimeError):
    """An iterative procedure did not reach the requested tolerance.

    The best available estimate and its error are kept on the exception so
    callers can decide whether the value is still usable.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class InternalInconsistency(RuntimeError):
    """A quantity that must be positive (e.g. the partition function) is not."""


class ResourceLimit(RuntimeError):
    """Dense exact diagonalization requested beyond the memory guard."""
