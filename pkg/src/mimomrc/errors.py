"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


class NumericalError(RuntimeError):
    """Raised when a numerical routine cannot reach its accuracy target."""


class QuadratureError(NumericalError):
    """Quadrature failed to meet tolerance; carries the best estimate found.

    Attributes:
        estimate: value of the integral at the point of failure.
        error_bound: estimated absolute error of ``estimate``.
    """

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound
