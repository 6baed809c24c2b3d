"""
Backward regression Monte-Carlo solver for one-dimensional BSDEs

    Y_t = xi + int_t^T g(s, Z_s) ds - int_t^T Z_s dB_s

on a simulated PathBundle. The scheme is explicit in Y:

    Yhat_k = E[Y_{k+1} | X_k]
    Z_k    = E[(Y_{k+1} - Yhat_k) dB_k | X_k] / dt
    Y_k    = Yhat_k + g(t_k, Z_k) dt

Steps are inherently sequential; each conditional expectation is a
least-squares projection (see ``hrc.bsde.basis``).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np

from ..core.errors import PreconditionError, RegressionError
from ..core.generators import Generator
from ..sim.paths import PathBundle
from .basis import Projection, RegressionBasis


logger = logging.getLogger(__name__)

MIN_PATHS_PER_BASIS = 10


@dataclass(frozen=True)
class StepDiagnostics:
    """Regression diagnostics of one backward step."""
    step: int
    condition_number: float
    residual_rms: float
    n_basis: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "step": self.step,
            "condition_number": self.condition_number,
            "residual_rms": self.residual_rms,
            "n_basis": self.n_basis,
        }


@dataclass(frozen=True)
class BsdeSolution:
    """Per-path, per-step Y and Z with regression diagnostics."""
    y: np.ndarray
    z: np.ndarray
    y0: float
    regression_diag: List[StepDiagnostics] = field(default_factory=list)
    dt: float = 0.0

    @property
    def n_paths(self) -> int:
        return self.y.shape[0]

    @property
    def regression_error(self) -> float:
        """Accumulated regression noise in y0: per-step residual RMS / sqrt(n), in quadrature."""
        total = sum(d.residual_rms ** 2 for d in self.regression_diag)
        return math.sqrt(total / self.n_paths)

    def diagnostics_summary(self) -> Dict[str, Any]:
        return {
            "y0": self.y0,
            "n_paths": self.n_paths,
            "n_steps": self.y.shape[1] - 1,
            "regression_error": self.regression_error,
            "max_condition_number": max((d.condition_number for d in self.regression_diag), default=1.0),
            "steps": [d.to_dict() for d in self.regression_diag],
        }


def solve_bsde(bundle: PathBundle, gen: Generator, terminal: np.ndarray,
               basis: RegressionBasis = RegressionBasis()) -> BsdeSolution:
    """Solve the BSDE with generator ``gen`` and terminal samples ``terminal``."""
    terminal = np.asarray(terminal, dtype=float)
    n, n_steps, d, dt = bundle.n_paths, bundle.n_steps, bundle.dim, bundle.dt
    if terminal.shape != (n,):
        raise PreconditionError(f"terminal has shape {terminal.shape}, expected ({n},)")
    if n < MIN_PATHS_PER_BASIS * basis.size(d):
        raise PreconditionError(
            f"{n} paths is below {MIN_PATHS_PER_BASIS} x basis size {basis.size(d)}")

    y = np.empty((n, n_steps + 1))
    z = np.empty((n, n_steps, d))
    y[:, n_steps] = terminal
    diagnostics: List[StepDiagnostics] = []

    for k in range(n_steps - 1, -1, -1):
        t = bundle.t0 + k * dt
        projection = Projection.fit(basis, bundle.states[:, k])
        if projection.condition_number > basis.condition_limit:
            raise RegressionError(k, projection.condition_number, basis.condition_limit)
        y_next = y[:, k + 1]
        continuation = projection(y_next)
        residual = y_next - continuation
        z[:, k] = projection(residual[:, None] * bundle.increments[:, k]) / dt
        y[:, k] = continuation + gen(t, z[:, k]) * dt
        diagnostics.append(StepDiagnostics(
            step=k,
            condition_number=projection.condition_number,
            residual_rms=float(np.sqrt(np.mean(residual * residual))),
            n_basis=projection.n_basis,
        ))

    diagnostics.reverse()
    y.setflags(write=False)
    z.setflags(write=False)
    y0 = float(np.mean(y[:, 0]))
    logger.debug("BSDE solved: y0=%.10g, %d steps, %d paths", y0, n_steps, n)
    return BsdeSolution(y=y, z=z, y0=y0, regression_diag=diagnostics, dt=dt)


def conditional_g_expectation(bundle: PathBundle, gen: Generator, terminal: np.ndarray,
                              basis: RegressionBasis, k: int) -> np.ndarray:
    """Sampled E_g[xi | F_{t_k}] along each path."""
    if not 0 <= k <= bundle.n_steps:
        raise PreconditionError(f"step index must be in [0, {bundle.n_steps}], got {k}")
    return solve_bsde(bundle, gen, terminal, basis).y[:, k]


def risk_measure(bundle: PathBundle, gen: Generator, terminal: np.ndarray,
                 basis: RegressionBasis = RegressionBasis()) -> float:
    """rho^g_{0,T}[xi] = Y_0."""
    return solve_bsde(bundle, gen, terminal, basis).y0
