"""Periodic equilibria, fold curves and travelling fronts of the Nagumo
lattice differential equation u_i' = d(u_{i-1} - 2u_i + u_{i+1}) + u_i(1-u_i)(u_i-a)."""

__version__ = "0.1.0"

from .errors import NagumoError
from .words import Letter, Word

__all__ = ["Letter", "NagumoError", "Word", "__version__"]
