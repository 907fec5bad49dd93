"""Exception types raised by the analyzers and solvers."""


class MinlagError(Exception):
    """Base class for all package errors."""


class DomainError(MinlagError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class PreconditionError(MinlagError, ValueError):
    """The input violates a geometric precondition (tangency, Lagrangian, ...)."""


class DegeneracyError(MinlagError, ArithmeticError):
    """The induced metric is (numerically) degenerate."""


class ConvergenceError(MinlagError, RuntimeError):
    """An iterative solver failed to converge within its iteration budget."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class AmbiguityError(MinlagError, RuntimeError):
    """A computed eigenvalue falls inside the safety band below 1; refine the grid."""
