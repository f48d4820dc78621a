"""Numerical toolkit for spectral tori built from pairs of hyperelliptic curves."""

from .errors import SpectralError
from .geometry import Family, ModuliPoint, Sign, quotient_curves, validate_moduli_point

__all__ = ["SpectralError", "Family", "ModuliPoint", "Sign", "quotient_curves", "validate_moduli_point"]
__version__ = "0.1.0"
