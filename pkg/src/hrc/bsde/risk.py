"""
Risk values of policy pairs and the comparison-theorem check.

The risk value of a player under fixed feedback policies is computed by the
cost-augmentation transformation: solve the BSDE for Yhat with terminal
int_0^T c ds + Psi(X_T), then Y_s = Yhat_s - int_0^s c du. Only the zero-time
value is a number; the corrected process is kept for inspection.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from ..core.errors import PreconditionError
from ..core.generators import Generator
from ..core.problem import Player, ProblemSpec
from ..sim.paths import PathBundle, running_cost_integral, simulate
from ..sim.policies import FeedbackPolicy
from .basis import RegressionBasis
from .solver import BsdeSolution, solve_bsde


logger = logging.getLogger(__name__)

COMPARISON_FLOOR = 1e-8
COMPARISON_SIGMAS = 3.0


def comparison_tolerance(*solutions: BsdeSolution) -> float:
    """10^-8 plus three combined regression error estimates."""
    combined = math.sqrt(sum(s.regression_error ** 2 for s in solutions))
    return COMPARISON_FLOOR + COMPARISON_SIGMAS * combined


@dataclass
class RiskValueResult:
    """Risk value of one player with its Monte-Carlo diagnostics."""
    player: Player
    y0: float
    standard_error: float
    solution: BsdeSolution
    running_cost: np.ndarray
    bundle: PathBundle

    @property
    def corrected_y(self) -> np.ndarray:
        """Y_s = Yhat_s - int_0^s c along each path."""
        return self.solution.y - self.running_cost

    def to_dict(self) -> Dict[str, Any]:
        return {
            "player": self.player.value,
            "y0": self.y0,
            "standard_error": self.standard_error,
            "regression_error": self.solution.regression_error,
            "n_paths": self.bundle.n_paths,
            "dt": self.bundle.dt,
            "seed": self.bundle.seed,
        }


def evaluate_risk_value(spec: ProblemSpec, leader: FeedbackPolicy, follower: FeedbackPolicy,
                        player: Player, n_paths: int, dt: float, seed: int,
                        basis: RegressionBasis = RegressionBasis(), threads: int = 1,
                        bundle: Optional[PathBundle] = None) -> RiskValueResult:
    """Risk value V_i(0, x0) of ``player`` under the given policies."""
    try:
        player = Player(player)
    except ValueError:
        raise PreconditionError(f"unknown player '{player}'")
    if bundle is None:
        bundle = simulate(spec, leader, follower, n_paths, dt, seed, threads=threads)
    running = running_cost_integral(bundle, spec, player)
    xi = running[:, -1] + spec.terminal(player)(bundle.terminal_states)
    solution = solve_bsde(bundle, spec.generator(player), xi, basis)
    n = bundle.n_paths
    se = float(np.std(xi, ddof=1) / math.sqrt(n)) if n > 1 else float("inf")
    logger.info("Risk value (%s): %.10g +/- %.3g", player.value, solution.y0, se)
    return RiskValueResult(player=player, y0=solution.y0, standard_error=se,
                           solution=solution, running_cost=running, bundle=bundle)


def risk_value(spec: ProblemSpec, leader: FeedbackPolicy, follower: FeedbackPolicy,
               player: Player, n_paths: int, dt: float, seed: int,
               basis: RegressionBasis = RegressionBasis(), threads: int = 1) -> float:
    return evaluate_risk_value(spec, leader, follower, player, n_paths, dt, seed,
                               basis, threads).y0


@dataclass
class ComparisonReport:
    y_a0: float
    y_b0: float
    ordered: bool
    tolerance: float
    strict_terminal_fraction: float
    strict_fraction: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "yA0": self.y_a0,
            "yB0": self.y_b0,
            "ordered": self.ordered,
            "tolerance": self.tolerance,
            "strict_terminal_fraction": self.strict_terminal_fraction,
            "strict_fraction": list(self.strict_fraction),
        }


def _check_generator_order(gen_a: Generator, gen_b: Generator, dim: int,
                           n_samples: int, z_bound: float, seed: int) -> None:
    rng = np.random.default_rng(seed)
    z = rng.uniform(-z_bound, z_bound, size=(n_samples, dim))
    z[0] = 0.0
    gap = gen_a(0.0, z) - gen_b(0.0, z)
    bad = np.nonzero(gap < -1e-12)[0]
    if bad.size:
        i = int(bad[0])
        raise PreconditionError(
            f"genA < genB at sample {i} (z={z[i].tolist()}): {gen_a(0.0, z[i]):.6g} < {gen_b(0.0, z[i]):.6g}")


def comparison_check(bundle: PathBundle, gen_a: Generator, gen_b: Generator,
                     terminal_a: np.ndarray, terminal_b: np.ndarray,
                     basis: RegressionBasis = RegressionBasis(),
                     z_samples: int = 1024, z_bound: float = 10.0, seed: int = 0) -> ComparisonReport:
    """
    Solve both BSDEs on the same bundle and check yA0 >= yB0 - tol.

    Requires terminalA >= terminalB on every path and genA >= genB on
    sampled z. Strict ordering is reported as the fraction of paths with
    Y^A_k > Y^B_k per step and is never asserted.
    """
    terminal_a = np.asarray(terminal_a, dtype=float)
    terminal_b = np.asarray(terminal_b, dtype=float)
    if terminal_a.shape != terminal_b.shape:
        raise PreconditionError(f"terminal shapes differ: {terminal_a.shape} vs {terminal_b.shape}")
    bad = np.nonzero(terminal_a < terminal_b)[0]
    if bad.size:
        i = int(bad[0])
        raise PreconditionError(
            f"terminalA < terminalB on path {i}: {terminal_a[i]:.17g} < {terminal_b[i]:.17g}")
    _check_generator_order(gen_a, gen_b, bundle.dim, z_samples, z_bound, seed)

    sol_a = solve_bsde(bundle, gen_a, terminal_a, basis)
    sol_b = solve_bsde(bundle, gen_b, terminal_b, basis)
    tol = comparison_tolerance(sol_a, sol_b)
    strict = [float(np.mean(sol_a.y[:, k] > sol_b.y[:, k])) for k in range(bundle.n_steps + 1)]
    return ComparisonReport(
        y_a0=sol_a.y0,
        y_b0=sol_b.y0,
        ordered=bool(sol_a.y0 >= sol_b.y0 - tol),
        tolerance=tol,
        strict_terminal_fraction=float(np.mean(terminal_a > terminal_b)),
        strict_fraction=strict,
    )


@dataclass
class TimeConsistencyReport:
    r_step: int
    direct: float
    nested: float
    tolerance: float

    @property
    def difference(self) -> float:
        return abs(self.direct - self.nested)

    @property
    def consistent(self) -> bool:
        return self.difference <= self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {
            "r_step": self.r_step,
            "direct": self.direct,
            "nested": self.nested,
            "difference": self.difference,
            "tolerance": self.tolerance,
            "consistent": self.consistent,
        }


def time_consistency_check(bundle: PathBundle, gen: Generator, terminal: np.ndarray,
                           basis: RegressionBasis = RegressionBasis(),
                           r_step: Optional[int] = None) -> TimeConsistencyReport:
    """Compare rho_{0,T}[xi] with rho_{0,r}[rho_{r,T}[xi]] on the truncated bundle."""
    if r_step is None:
        r_step = bundle.n_steps // 2
    if not 0 <= r_step <= bundle.n_steps:
        raise PreconditionError(f"r_step must be in [0, {bundle.n_steps}], got {r_step}")
    direct = solve_bsde(bundle, gen, terminal, basis)
    nested = solve_bsde(bundle.head(r_step), gen, direct.y[:, r_step], basis)
    return TimeConsistencyReport(
        r_step=r_step,
        direct=direct.y0,
        nested=nested.y0,
        tolerance=comparison_tolerance(direct, nested),
    )
