"""Numerical toolkit for weighted Poincare inequalities on warped-product models."""

from . import decay, ends, profiles, rho_metric, rigidity, spectral, warped, weights
from .errors import WPError

__all__ = ["decay", "ends", "profiles", "rho_metric", "rigidity", "spectral", "warped", "weights", "WPError"]
__version__ = "0.1.0"
