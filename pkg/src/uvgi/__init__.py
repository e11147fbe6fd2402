"""Planning and simulation engine for robotic UV surface disinfection.

Core pieces: irradiance/dose math (`radiometry`), lawnmower coverage
planning with dose-scaled sweep velocity (`planner`), dose-grid execution
simulation with virtual sensors (`simulator`), plus an HTTP service and a
batch CLI on top.
"""

__version__ = "0.1.0"

from .errors import ConfigurationError, DomainError, FitError, PlanningError

__all__ = [
    "ConfigurationError",
    "DomainError",
    "FitError",
    "PlanningError",
    "__version__",
]
