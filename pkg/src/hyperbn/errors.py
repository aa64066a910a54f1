"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside a function's mathematical domain (x < 0, n <= 2, ...)."""


class DegenerateInputError(ValueError):
    """Input is identically zero where a nonzero function is required."""


class ProfileRejectedError(ValueError):
    """Profile does not satisfy the boundary condition an identity assumes."""


class BracketError(RuntimeError):
    """A root- or eigenvalue-search window failed to bracket a sign change."""
