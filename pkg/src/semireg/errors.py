"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class CapabilityError(ValueError):
    """A request exceeds a documented capability ceiling (index, size, range)."""


class NonConvergenceError(RuntimeError):
    """A quadrature or iteration failed to reach its requested tolerance."""
