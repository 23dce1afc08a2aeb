"""Exception types shared across the package."""


class ChebAccelError(Exception):
    """Base class for all package-specific errors."""


class NotSymmetricError(ChebAccelError):
    """Matrix is not symmetric within the requested tolerance."""


class NoConvergenceError(ChebAccelError):
    """Iterative routine did not reach its tolerance within the budget.

    Carries the best estimate so far in ``estimate`` when one exists.
    """

    def __init__(self, message: str, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class DegenerateSpectrumError(ChebAccelError):
    """Spectral bounds unusable: lambda_min <= 0 or lambda_min == lambda_max."""


class SizeLimitError(ChebAccelError):
    """Request exceeds a deliberate tractability limit."""


class NonFiniteError(ChebAccelError):
    """An iterate or Jacobian entry became NaN or infinite."""


class ZeroDiagonalError(ChebAccelError):
    """System matrix has a zero diagonal entry."""


class StepTooLargeError(ChebAccelError):
    """Step size exceeds the stability threshold 1/lambda_max."""


class SingularMatrixError(ChebAccelError):
    """Matrix is singular within tolerance where nonsingularity is required."""


class NegativeDerivativeError(ChebAccelError):
    """Componentwise derivative took a negative value where >= 0 is required."""


class UnknownExperimentError(ChebAccelError):
    """Experiment name not present in the registry."""


class InvalidOverrideError(ChebAccelError):
    """Configuration override key not recognized by the experiment."""
