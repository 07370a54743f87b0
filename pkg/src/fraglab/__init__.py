"""fraglab: reliability, equilibria, and cascades in complex supply networks."""

from fraglab.reliability import (
    CriticalPoint,
    Technology,
    chi,
    critical_point,
    market_sourcing_prob,
    reliability_map,
    rho,
    rho_tau,
    rho_truncated,
    simple_threshold,
)

__all__ = [
    "CriticalPoint",
    "Technology",
    "chi",
    "critical_point",
    "market_sourcing_prob",
    "reliability_map",
    "rho",
    "rho_tau",
    "rho_truncated",
    "simple_threshold",
]

__version__ = "0.1.0"
