"""Exception types raised by the library."""


class OstrogradskyError(Exception):
    """Base class for all library errors."""


class StructureError(OstrogradskyError, ValueError):
    """A callback or state has the wrong shape, or a required field is missing."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class SingularityError(OstrogradskyError, ArithmeticError):
    """A matrix that must be inverted is singular or too badly conditioned."""

    def __init__(self, message, condition=float("inf")):
        self.condition = condition
        super().__init__(f"{message} (condition estimate {condition:.3e})")


class SecondClassError(SingularityError):
    """The constraint bracket matrix cannot be inverted at the given state."""


class ProjectionError(OstrogradskyError, RuntimeError):
    """Gauss-Newton projection onto the constraint manifold did not converge."""

    def __init__(self, residual, iterations):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"projection did not converge after {iterations} iterations "
            f"(max residual {residual:.3e})"
        )


class DivergenceError(OstrogradskyError, FloatingPointError):
    """The integrator produced non-finite values."""

    def __init__(self, step, message="non-finite values in right-hand side"):
        self.step = step
        super().__init__(f"step {step}: {message}")
