"""Exception types shared across the package.

The CLI maps ``ResourceError`` and ``PrecisionError`` to exit code 3.
"""


class DomainError(ValueError):
    """Argument outside the supported domain."""


class PoleError(DomainError):
    """Evaluation requested at a pole."""


class ResourceError(RuntimeError):
    """Estimated memory or time exceeds the configured budget."""

    def __init__(self, message, estimate=None, budget=None):
        super().__init__(message)
        self.estimate = estimate
        self.budget = budget


class PrecisionError(ArithmeticError):
    """A certified error bound could not be met."""

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class TruncationError(ArithmeticError):
    """A truncated series does not carry the requested coefficient."""


class SingularityError(ZeroDivisionError):
    """Division by a non-invertible series."""


class DegenerateFitError(ValueError):
    """Regression input has no usable points."""
