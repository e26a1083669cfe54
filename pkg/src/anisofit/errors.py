class DomainError(ValueError):
    """Argument outside the admissible domain of an operation."""


class InfeasibleStateError(DomainError):
    """A deformation state violates a model's extensibility limit.

    ``bound`` names the violated constraint so callers (the optimizer in
    particular) can report it.
    """

    def __init__(self, message, bound=None, value=None):
        super().__init__(message)
        self.bound = bound
        self.value = value


class QuadratureError(ArithmeticError):
    """Numerical integration failed to reach the requested tolerance."""


class DatasetError(ValueError):
    """Malformed or inconsistent experimental data."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
