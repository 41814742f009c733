"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Raised when an input violates a documented precondition."""


class SolverError(RuntimeError):
    """A linear solve or quadrature failed its acceptance check."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegeneracyError(SolverError):
    """A matching denominator came out numerically singular."""


class DivergenceError(SolverError):
    """Fixed-point iteration diverged; carries the norm history."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history or []


class AirySectorError(ArithmeticError):
    """Airy evaluation would overflow in the growing sector."""

    def __init__(self, message, z=None):
        super().__init__(message)
        self.z = z
