"""
Backward sweeps of the explicit scheme

    phi^k = phi^{k+1} + dt * H(t_k, x, phi^{k+1})

for the follower alone (leader play supplied) and for the coupled
hierarchical system (leader argmin with the follower best response nested).
Time slices are sequential; nodes within a slice are split into chunks that
may run on a thread pool. Chunks only read the next slice.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from ..core.errors import PreconditionError
from ..core.problem import Player, ProblemSpec
from ..sim.policies import ConstantPolicy
from .grid import LatticeGrid, PolicyField, ValueField, build_grid
from .operators import follower_kernel, hierarchical_kernel, slice_derivatives


logger = logging.getLogger(__name__)

DEFAULT_TIE_TOL = 1e-12


@dataclass
class SweepReport:
    """CFL numbers, per-slice extrema and tie-break counts of one sweep."""
    grid: Dict[str, Any]
    slice_min: Dict[str, List[float]] = field(default_factory=dict)
    slice_max: Dict[str, List[float]] = field(default_factory=dict)
    follower_ties: int = 0
    leader_ties: int = 0
    tie_tol: float = DEFAULT_TIE_TOL

    def to_dict(self) -> Dict[str, Any]:
        return {
            "grid": self.grid,
            "slice_min": self.slice_min,
            "slice_max": self.slice_max,
            "follower_ties": self.follower_ties,
            "leader_ties": self.leader_ties,
            "tie_tol": self.tie_tol,
        }


@dataclass
class HierarchicalSolution:
    """Leader and follower value fields with the decision tables on one grid."""
    grid: LatticeGrid
    leader: ValueField
    follower: ValueField
    policy: PolicyField
    report: SweepReport

    def value_field(self, player: Player) -> ValueField:
        return self.leader if Player(player) is Player.LEADER else self.follower

    def value_at(self, player: Player, x, k: int = 0) -> float:
        """phi_i(t_k, x) by multilinear interpolation."""
        return self.grid.interpolate(self.value_field(player).values[k], x)

    def initial_values(self) -> Dict[str, float]:
        x0 = self.grid.spec.x0
        return {"leader": self.value_at(Player.LEADER, x0), "follower": self.value_at(Player.FOLLOWER, x0)}


def _chunks(n: int, threads: int) -> List[np.ndarray]:
    size = max(1, math.ceil(n / max(1, threads)))
    return [np.arange(start, min(start + size, n)) for start in range(0, n, size)]


def _run_chunks(task: Callable[[np.ndarray], None], n: int, threads: int) -> None:
    chunks = _chunks(n, threads)
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(task, chunks))
    else:
        for chunk in chunks:
            task(chunk)


def _resolve_grid(spec: ProblemSpec, grid: Optional[LatticeGrid], nodes_per_axis, n_t) -> LatticeGrid:
    if grid is None:
        return build_grid(spec, nodes_per_axis, n_t=n_t)
    if grid.spec is not spec and grid.spec.digest != spec.digest:
        raise PreconditionError("grid was built for a different problem")
    return grid


def hierarchical_step(spec: ProblemSpec, grid: LatticeGrid, t: float, dt: float,
                      leader_next: np.ndarray, follower_next: np.ndarray,
                      threads: int = 1, tie_tol: float = DEFAULT_TIE_TOL):
    """One explicit step of the coupled system from slices at t + dt to t."""
    n = grid.n_nodes
    leader_deriv = slice_derivatives(grid, leader_next)
    follower_deriv = slice_derivatives(grid, follower_next)
    leader_now = np.empty(n)
    follower_now = np.empty(n)
    v_star = np.empty(n, dtype=int)
    w_star = np.empty(n, dtype=int)
    follower_ties = np.zeros(n, dtype=bool)
    leader_ties = np.zeros(n, dtype=bool)

    def task(idx: np.ndarray) -> None:
        result = hierarchical_kernel(spec, t, grid.nodes[idx], leader_deriv.take(idx),
                                     follower_deriv.take(idx), tie_tol)
        leader_now[idx] = leader_next[idx] + dt * result.h1
        follower_now[idx] = follower_next[idx] + dt * result.h2
        v_star[idx] = result.v_star
        w_star[idx] = result.w_star
        follower_ties[idx] = result.follower_ties
        leader_ties[idx] = result.leader_ties

    _run_chunks(task, n, threads)
    return leader_now, follower_now, v_star, w_star, follower_ties, leader_ties


def backward_sweep_hierarchical(spec: ProblemSpec, grid: Optional[LatticeGrid] = None,
                                nodes_per_axis=101, n_t: Optional[int] = None, threads: int = 1,
                                tie_tol: float = DEFAULT_TIE_TOL) -> HierarchicalSolution:
    """Solve the coupled HJB system backward from the terminal costs."""
    grid = _resolve_grid(spec, grid, nodes_per_axis, n_t)
    n, n_t = grid.n_nodes, grid.n_t
    phi1 = np.empty((n_t + 1, n))
    phi2 = np.empty((n_t + 1, n))
    v_table = np.empty((n_t, n), dtype=int)
    w_table = np.empty((n_t, n), dtype=int)
    phi1[n_t] = spec.leader_terminal(grid.nodes)
    phi2[n_t] = spec.follower_terminal(grid.nodes)
    follower_ties = leader_ties = 0

    for k in range(n_t - 1, -1, -1):
        phi1[k], phi2[k], v_table[k], w_table[k], f_ties, l_ties = hierarchical_step(
            spec, grid, grid.times[k], grid.dt, phi1[k + 1], phi2[k + 1], threads, tie_tol)
        follower_ties += int(f_ties.sum())
        leader_ties += int(l_ties.sum())

    report = SweepReport(
        grid=grid.describe(),
        slice_min={"leader": phi1.min(axis=1).tolist(), "follower": phi2.min(axis=1).tolist()},
        slice_max={"leader": phi1.max(axis=1).tolist(), "follower": phi2.max(axis=1).tolist()},
        follower_ties=follower_ties,
        leader_ties=leader_ties,
        tie_tol=tie_tol,
    )
    if follower_ties or leader_ties:
        logger.warning("Sweep hit tie-break nodes: follower=%d leader=%d", follower_ties, leader_ties)
    logger.info("Hierarchical sweep done: %s nodes x %d steps", grid.shape, n_t)
    for array in (phi1, phi2, v_table, w_table):
        array.setflags(write=False)
    return HierarchicalSolution(
        grid=grid,
        leader=ValueField(Player.LEADER, phi1),
        follower=ValueField(Player.FOLLOWER, phi2),
        policy=PolicyField(v_table, w_table, spec.leader_controls.size, spec.follower_controls.size),
        report=report,
    )


LeaderPlay = Union[int, np.ndarray, ConstantPolicy, PolicyField]


def _leader_table(spec: ProblemSpec, grid: LatticeGrid, leader: LeaderPlay) -> np.ndarray:
    if isinstance(leader, PolicyField):
        leader = leader.leader
    elif isinstance(leader, ConstantPolicy):
        leader = leader.index
    if isinstance(leader, (int, np.integer)):
        if not 0 <= leader < spec.leader_controls.size:
            raise PreconditionError(f"leader index {leader} outside [0, {spec.leader_controls.size})")
        return np.full((grid.n_t, grid.n_nodes), int(leader), dtype=int)
    table = np.asarray(leader)
    if table.shape != (grid.n_t, grid.n_nodes):
        raise PreconditionError(f"leader table has shape {table.shape}, expected {(grid.n_t, grid.n_nodes)}")
    return table.astype(int)


def backward_sweep_follower(spec: ProblemSpec, leader: LeaderPlay, grid: Optional[LatticeGrid] = None,
                            nodes_per_axis=101, n_t: Optional[int] = None, threads: int = 1,
                            tie_tol: float = DEFAULT_TIE_TOL) -> Tuple[ValueField, PolicyField]:
    """Follower HJB under a fixed leader play (constant index, policy, PolicyField or [n_t, nodes] table)."""
    grid = _resolve_grid(spec, grid, nodes_per_axis, n_t)
    v_table = _leader_table(spec, grid, leader)
    n, n_t = grid.n_nodes, grid.n_t
    phi2 = np.empty((n_t + 1, n))
    w_table = np.empty((n_t, n), dtype=int)
    phi2[n_t] = spec.follower_terminal(grid.nodes)
    v_points = spec.leader_controls.points
    ties = 0

    for k in range(n_t - 1, -1, -1):
        deriv = slice_derivatives(grid, phi2[k + 1])
        t = grid.times[k]
        tie_mask = np.zeros(n, dtype=bool)

        def task(idx: np.ndarray) -> None:
            best, index, tied = follower_kernel(spec, t, grid.nodes[idx], deriv.take(idx),
                                                v_points[v_table[k, idx]], tie_tol)
            phi2[k, idx] = phi2[k + 1, idx] + grid.dt * best
            w_table[k, idx] = index
            tie_mask[idx] = tied

        _run_chunks(task, n, threads)
        ties += int(tie_mask.sum())

    if ties:
        logger.warning("Follower sweep hit %d tie-break nodes", ties)
    logger.info("Follower sweep done: %s nodes x %d steps", grid.shape, n_t)
    policy = PolicyField(v_table, w_table, spec.leader_controls.size, spec.follower_controls.size)
    phi2.setflags(write=False)
    return ValueField(Player.FOLLOWER, phi2), policy
