"""
Explicit monotone finite-difference solver for the coupled leader/follower
HJB system.
"""

from .crossval import CrossValidationReport, cross_validate, leader_deviation_gain, policies_from_solution
from .dpp import dpp_residual
from .grid import LatticeGrid, PolicyField, ValueField, build_grid
from .operators import (
    GridSlice, apply_operator, best_response_set, follower_hamiltonian, gradient, leader_step,
)
from .reference import reference_sweep
from .sweep import HierarchicalSolution, SweepReport, backward_sweep_follower, backward_sweep_hierarchical

__all__ = [
    "CrossValidationReport", "cross_validate", "leader_deviation_gain", "policies_from_solution",
    "dpp_residual",
    "LatticeGrid", "PolicyField", "ValueField", "build_grid",
    "GridSlice", "apply_operator", "best_response_set", "follower_hamiltonian", "gradient", "leader_step",
    "reference_sweep",
    "HierarchicalSolution", "SweepReport", "backward_sweep_follower", "backward_sweep_hierarchical",
]
