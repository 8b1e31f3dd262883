"""Fluctuation theory toolkit for one-sided Markov additive processes."""

__version__ = "0.1.0"

from .errors import MapError
from .model import LatticeModel, MmbmModel, birth_death, drift_and_pi, validate
from .solvers import Fundamentals, SolveOptions, solve, solve_lattice, solve_mmbm

__all__ = [
    "MapError", "LatticeModel", "MmbmModel", "birth_death", "drift_and_pi", "validate",
    "Fundamentals", "SolveOptions", "solve", "solve_lattice", "solve_mmbm", "__version__",
]
