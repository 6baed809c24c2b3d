"""
Discrete dynamic-programming self-consistency.

Replaying the first r_steps of the sweep from the stored slice at t_r must
reproduce the stored value at (0, x0) exactly; replaying on a finer time
step exposes the first-order time discretization error.
"""

import logging

import numpy as np

from ..core.errors import PreconditionError
from ..core.problem import Player, ProblemSpec
from .sweep import HierarchicalSolution, hierarchical_step


logger = logging.getLogger(__name__)


def replay(spec: ProblemSpec, solution: HierarchicalSolution, r_steps: int, refine: int = 1,
           threads: int = 1):
    """Both value slices at t = 0 recomputed from the stored slices at t_{r_steps}."""
    grid = solution.grid
    if not 1 <= r_steps <= grid.n_t:
        raise PreconditionError(f"r_steps must be in [1, {grid.n_t}], got {r_steps}")
    if refine < 1:
        raise PreconditionError(f"refine must be >= 1, got {refine}")
    phi1 = np.array(solution.leader.values[r_steps])
    phi2 = np.array(solution.follower.values[r_steps])
    dt = grid.dt / refine
    for step in range(r_steps * refine - 1, -1, -1):
        phi1, phi2, *_ = hierarchical_step(spec, grid, dt * step, dt, phi1, phi2, threads)
    return phi1, phi2


def dpp_residual(spec: ProblemSpec, solution: HierarchicalSolution, player: Player, r_steps: int,
                 refine: int = 1, threads: int = 1) -> float:
    """|phi_i(0, x0) replayed over [0, t_r] - stored phi_i(0, x0)|."""
    player = Player(player)
    phi1, phi2 = replay(spec, solution, r_steps, refine, threads)
    replayed = phi1 if player is Player.LEADER else phi2
    grid = solution.grid
    residual = abs(grid.interpolate(replayed, spec.x0) - solution.value_at(player, spec.x0))
    logger.debug("DPP residual (%s, r=%d, refine=%d): %.3e", player.value, r_steps, refine, residual)
    return residual
