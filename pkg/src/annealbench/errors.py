"""Exception types shared across annealbench.

The CLI maps these onto exit codes: usage -> 1, numeric/domain -> 2.
"""


class AnnealError(Exception):
    pass


class UsageError(AnnealError, ValueError):
    """Bad arguments, malformed specs, violated preconditions."""


class NumericError(AnnealError, ArithmeticError):
    """A numerical procedure failed to meet its accuracy contract."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DomainError(AnnealError, ValueError):
    """Input is valid but lies outside the region where a result exists
    (degenerate ground state, no crossing point, ...)."""
