"""Random-cluster (Fortuin-Kasteleyn) model on planar lattices.

Exact enumeration on small regions, Monte Carlo samplers, crossing and
connectivity analytics, and a verification harness for the standard
correlation inequalities of the model.
"""
from .events import C_H, C_V, Event, connected, crossing, edge_open
from .exact import BoundaryCondition, RCParams
from .lattice import HEXAGONAL, SQUARE, TRIANGULAR, Region, build_region, dual_region, pstar, solve_critical_point

__version__ = "0.1.0"

__all__ = [
    "C_H", "C_V", "Event", "connected", "crossing", "edge_open", "BoundaryCondition", "RCParams",
    "HEXAGONAL", "SQUARE", "TRIANGULAR", "Region", "build_region", "dual_region", "pstar",
    "solve_critical_point",
]
