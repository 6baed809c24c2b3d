"""
Grid versus Monte-Carlo agreement of the solved strategies, and pointwise
leader optimality.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Tuple

from ..bsde.basis import RegressionBasis
from ..bsde.risk import evaluate_risk_value
from ..core.errors import PreconditionError
from ..core.problem import Player, ProblemSpec
from ..sim.paths import simulate
from ..sim.policies import TabulatedPolicy
from .operators import GridSlice, leader_expression, leader_step
from .sweep import HierarchicalSolution


logger = logging.getLogger(__name__)

BOUNDARY_MARGIN = 0.1


@dataclass
class CrossValidationReport:
    grid_value_1: float
    mc_value_1: float
    standard_error_1: float
    grid_value_2: float
    mc_value_2: float
    standard_error_2: float
    n_paths: int
    dt_mc: float
    seed: int

    @property
    def gaps(self) -> Tuple[float, float]:
        return abs(self.grid_value_1 - self.mc_value_1), abs(self.grid_value_2 - self.mc_value_2)

    def to_dict(self) -> Dict[str, Any]:
        gap_1, gap_2 = self.gaps
        return {
            "grid_value_1": self.grid_value_1,
            "mc_value_1": self.mc_value_1,
            "standard_error_1": self.standard_error_1,
            "grid_value_2": self.grid_value_2,
            "mc_value_2": self.mc_value_2,
            "standard_error_2": self.standard_error_2,
            "gaps": [gap_1, gap_2],
            "n_paths": self.n_paths,
            "dt_mc": self.dt_mc,
            "seed": self.seed,
        }


def policies_from_solution(spec: ProblemSpec, solution: HierarchicalSolution
                           ) -> Tuple[TabulatedPolicy, TabulatedPolicy]:
    """The solved v*, w* tables as nearest-node feedback policies."""
    grid = solution.grid
    return (TabulatedPolicy(spec.leader_controls, solution.policy.leader, grid),
            TabulatedPolicy(spec.follower_controls, solution.policy.follower, grid))


def cross_validate(spec: ProblemSpec, solution: HierarchicalSolution, n_paths: int, dt_mc: float,
                   seed: int, basis: RegressionBasis = RegressionBasis(),
                   threads: int = 1) -> CrossValidationReport:
    """Compare phi_i(0, x0) with the risk values of the solved strategies."""
    if solution.grid.spec.digest != spec.digest:
        raise PreconditionError("solution was computed for a different problem")
    if not spec.domain_box.contains(spec.x0, margin=BOUNDARY_MARGIN):
        raise PreconditionError(
            f"initial state {spec.x0.tolist()} is closer than {BOUNDARY_MARGIN:.0%} "
            "of the box width to the boundary")
    leader, follower = policies_from_solution(spec, solution)
    bundle = simulate(spec, leader, follower, n_paths, dt_mc, seed, threads=threads)
    mc_1 = evaluate_risk_value(spec, leader, follower, Player.LEADER, n_paths, dt_mc, seed,
                               basis, bundle=bundle)
    mc_2 = evaluate_risk_value(spec, leader, follower, Player.FOLLOWER, n_paths, dt_mc, seed,
                               basis, bundle=bundle)
    grid_values = solution.initial_values()
    report = CrossValidationReport(
        grid_value_1=grid_values["leader"],
        mc_value_1=mc_1.y0,
        standard_error_1=mc_1.standard_error,
        grid_value_2=grid_values["follower"],
        mc_value_2=mc_2.y0,
        standard_error_2=mc_2.standard_error,
        n_paths=n_paths,
        dt_mc=bundle.dt,
        seed=seed,
    )
    logger.info("Cross-validation gaps: leader=%.3e follower=%.3e", *report.gaps)
    return report


def leader_deviation_gain(spec: ProblemSpec, solution: HierarchicalSolution, k: int, node: int,
                          v_index: int) -> float:
    """
    One-step leader value at (t_k, node) when v* is replaced by V[v_index]
    (follower best response re-evaluated), minus the value of v*.
    """
    grid = solution.grid
    if not 0 <= k < grid.n_t:
        raise PreconditionError(f"k must be in [0, {grid.n_t}), got {k}")
    t = grid.times[k]
    leader_slice = GridSlice(grid, solution.leader.values[k + 1], t)
    follower_slice = GridSlice(grid, solution.follower.values[k + 1], t)
    h1_star, _, _, _ = leader_step(leader_slice, follower_slice, node, spec)
    deviated, _ = leader_expression(leader_slice, follower_slice, node, spec, v_index)
    return grid.dt * (deviated - h1_star)
