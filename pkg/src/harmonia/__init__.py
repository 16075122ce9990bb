"""Discrete harmonic measure on weighted graphs and lattice domains."""
from ._backend import NAME as BACKEND
from .errors import (CheckFailure, ConsistencyError, GeometryError, HarmoniaError, InputError,
                     NoBoundaryError, NonConvergenceError)
from .graph_dirichlet import HarmonicKernel, harmonic_kernel, mean_value_solve, solve_dirichlet
from .harnack import harnack_index
from .union_construction import exhaustion_limit, union_measure
from .weighted_graph import Subdomain, SubdivisionSpec, WeightedGraph

__all__ = [
    "BACKEND", "CheckFailure", "ConsistencyError", "GeometryError", "HarmoniaError", "HarmonicKernel",
    "InputError", "NoBoundaryError", "NonConvergenceError", "Subdomain", "SubdivisionSpec",
    "WeightedGraph", "exhaustion_limit", "harmonic_kernel", "harnack_index", "mean_value_solve",
    "solve_dirichlet", "union_measure",
]
__version__ = "0.1.0"
