class DomainError(ValueError):
    """Raised when an input violates an operation's precondition."""


class FitFailure(DomainError):
    """Raised when a power-law fit is degenerate or unsupported by the data."""


class DivergenceError(RuntimeError):
    """Raised when SGD produces non-finite parameters."""
