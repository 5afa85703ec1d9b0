"""Jacobi (Wright-Fisher) diffusion on [0, d]: boundary classification,
hypergeometric eigenfunctions, spectral semigroup, hitting probabilities,
Hardy and Poincare constants, and Monte Carlo cross-checks."""

from .errors import (
    CensoringWarning,
    ConfigError,
    DivergenceError,
    DomainError,
    GuardError,
    JacobiError,
    NonConvergence,
    ParameterError,
    PoleError,
    RegimeError,
    TruncationWarning,
)
from .model import JacobiCoeffs, ShapeParams, classify, density_m, energy_form, quad_dm, total_mass

__version__ = "0.1.0"

__all__ = [
    "JacobiCoeffs",
    "ShapeParams",
    "classify",
    "density_m",
    "energy_form",
    "quad_dm",
    "total_mass",
    "JacobiError",
    "ParameterError",
    "DomainError",
    "PoleError",
    "GuardError",
    "RegimeError",
    "ConfigError",
    "NonConvergence",
    "DivergenceError",
    "TruncationWarning",
    "CensoringWarning",
]
