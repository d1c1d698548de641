"""Numerical laboratory for bistable Lotka-Volterra competition fronts in a
periodic habitat: principal eigenvalues, spreading speeds, pulsating-front
profiles, and executable versions of the comparison/stability theory."""

from .discretization import LineGrid, PeriodicGrid
from .periodic_coeffs import CompetitionSystem, PeriodicFn, validate_system

__all__ = [
    "CompetitionSystem",
    "LineGrid",
    "PeriodicFn",
    "PeriodicGrid",
    "validate_system",
]

__version__ = "0.1.0"
