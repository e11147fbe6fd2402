"""Exception types shared across the package."""


class DomainError(ValueError):
    """A physical quantity is outside its valid domain (negative dose, k <= 0, ...)."""


class FitError(ValueError):
    """Profile fitting failed: too few points or a rank-deficient system."""


class PlanningError(ValueError):
    """Coverage planning failed: degenerate region or region too small to sweep."""


class ConfigurationError(ValueError):
    """Inconsistent run configuration (grid/kernel mismatch, unstable time step)."""
