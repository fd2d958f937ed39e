"""Exception types shared across the package."""


class NumericError(RuntimeError):
    """A numerical procedure failed (factorization, root solve, non-finite value)."""


class FactorizationError(NumericError):
    """A symmetric positive definite factorization failed after the jitter ladder."""


class NoSignChangeError(NumericError):
    """A root bracket could not be established within the expansion cap."""
