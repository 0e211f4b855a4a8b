"""Mpemba-effect simulations for relaxing spin-1/2 ensembles."""

from .bloch import (
    BlochState,
    DomainError,
    StabilityReport,
    SystemParams,
    analytic_independent,
    rhs,
    stability,
    t2_from_tphi,
)
from .ode import IntegrationError, IntegratorConfig, Trajectory, first_crossing_time, integrate

__all__ = [
    "BlochState",
    "DomainError",
    "IntegrationError",
    "IntegratorConfig",
    "StabilityReport",
    "SystemParams",
    "Trajectory",
    "analytic_independent",
    "first_crossing_time",
    "integrate",
    "rhs",
    "stability",
    "t2_from_tphi",
]
