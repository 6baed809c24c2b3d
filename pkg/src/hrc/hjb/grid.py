"""
Space-time lattice over the computational box and the tabulated fields
living on it.

Nodes are stored flat in C order (last axis fastest). The time step is
checked against the explicit scheme's CFL bound

    dt <= h^2 / (2 d a_max + h f_max d)

with a_max and f_max sampled over nodes x control pairs x five times.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.errors import CflError, PreconditionError
from ..core.problem import Player, ProblemSpec


logger = logging.getLogger(__name__)

CFL_SAMPLE_TIMES = 5
DEFAULT_CFL_SAFETY = 0.9


@dataclass(frozen=True)
class CflBound:
    """Sampled coefficient maxima and the resulting time-step bound."""
    dt_max: float
    a_max: float
    f_max: float
    h: float

    def to_dict(self) -> Dict[str, float]:
        return {"dt_max": self.dt_max, "a_max": self.a_max, "f_max": self.f_max, "h": self.h}


class LatticeGrid:
    """Uniform tensor grid over ``spec.domain_box`` with n_t time steps."""

    def __init__(self, spec: ProblemSpec, nodes_per_axis: Union[int, Sequence[int]], n_t: int,
                 check_cfl: bool = True):
        d = spec.dim
        counts = (nodes_per_axis,) * d if isinstance(nodes_per_axis, (int, np.integer)) \
            else tuple(int(c) for c in nodes_per_axis)
        if len(counts) != d or min(counts) < 2:
            raise PreconditionError(f"need at least 2 nodes on each of {d} axes, got {counts}")
        if n_t < 1:
            raise PreconditionError(f"n_t must be >= 1, got {n_t}")
        self.spec = spec
        self.dim = d
        self.shape: Tuple[int, ...] = tuple(int(c) for c in counts)
        self.lower = np.asarray(spec.domain_box.lower, dtype=float)
        self.upper = np.asarray(spec.domain_box.upper, dtype=float)
        self.h: Tuple[float, ...] = tuple(
            float((self.upper[i] - self.lower[i]) / (self.shape[i] - 1)) for i in range(d))
        self.axes = [np.linspace(self.lower[i], self.upper[i], self.shape[i]) for i in range(d)]
        mesh = np.meshgrid(*self.axes, indexing="ij")
        self.nodes = np.stack([m.ravel() for m in mesh], axis=-1)
        self.nodes.setflags(write=False)
        self.n_t = int(n_t)
        self.dt = spec.horizon / self.n_t
        self.cfl = cfl_bound(spec, self)
        if check_cfl and self.dt > self.cfl.dt_max:
            raise CflError(self.dt, self.cfl.dt_max, suggested_n_t(spec.horizon, self.cfl.dt_max))

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_t + 1)

    @property
    def h_min(self) -> float:
        return min(self.h)

    @property
    def cfl_number(self) -> float:
        return self.dt / self.cfl.dt_max if self.cfl.dt_max > 0 else math.inf

    def time_index(self, t: float) -> int:
        """Slice holding the control used on [t_k, t_{k+1})."""
        return min(int(math.floor(t / self.dt + 1e-9)), self.n_t - 1)

    def nearest_node(self, x: np.ndarray) -> np.ndarray:
        """Flat index of the nearest node for each row of x (clipped to the box)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        idx = []
        for i in range(self.dim):
            k = np.rint((x[:, i] - self.lower[i]) / self.h[i]).astype(int)
            idx.append(np.clip(k, 0, self.shape[i] - 1))
        return np.ravel_multi_index(tuple(idx), self.shape)

    def interior_mask(self, margin: float) -> np.ndarray:
        """Nodes at least ``margin`` x box width away from every face."""
        width = self.upper - self.lower
        lo = self.lower + margin * width
        hi = self.upper - margin * width
        return np.all((self.nodes >= lo - 1e-12) & (self.nodes <= hi + 1e-12), axis=1)

    def interpolate(self, values: np.ndarray, x: Sequence[float]) -> float:
        """Multilinear interpolation of a flat slice at the point x."""
        x = np.asarray(x, dtype=float)
        grid_values = np.asarray(values).reshape(self.shape)
        base, weights = [], []
        for i in range(self.dim):
            s = (x[i] - self.lower[i]) / self.h[i]
            k = int(min(max(math.floor(s), 0), self.shape[i] - 2))
            base.append(k)
            weights.append(min(max(s - k, 0.0), 1.0))
        total = 0.0
        for corner in np.ndindex(*(2,) * self.dim):
            weight = 1.0
            for i, bit in enumerate(corner):
                weight *= weights[i] if bit else 1.0 - weights[i]
            if weight:
                total += weight * float(grid_values[tuple(b + c for b, c in zip(base, corner))])
        return total

    def describe(self) -> Dict[str, Any]:
        return {
            "shape": list(self.shape),
            "h": list(self.h),
            "n_t": self.n_t,
            "dt": self.dt,
            "cfl": self.cfl.to_dict(),
            "cfl_number": self.cfl_number,
        }


def cfl_bound(spec: ProblemSpec, grid: LatticeGrid) -> CflBound:
    """Sample a_max = max |a_ij| and f_max = max |f_i| and form the CFL bound."""
    a_max, f_max = 0.0, 0.0
    x = grid.nodes
    n = x.shape[0]
    for t in np.linspace(0.0, spec.horizon, CFL_SAMPLE_TIMES):
        for v in spec.leader_controls.points:
            vb = np.broadcast_to(v, (n, v.shape[0]))
            for w in spec.follower_controls.points:
                wb = np.broadcast_to(w, (n, w.shape[0]))
                a_max = max(a_max, float(np.max(np.abs(spec.diffusion_covariance(t, x, vb, wb)))))
                f_max = max(f_max, float(np.max(np.abs(spec.drift(t, x, vb, wb)))))
    h = grid.h_min
    d = spec.dim
    denom = 2.0 * d * a_max + h * f_max * d
    dt_max = math.inf if denom == 0 else h * h / denom
    return CflBound(dt_max=dt_max, a_max=a_max, f_max=f_max, h=h)


def suggested_n_t(horizon: float, dt_max: float, safety: float = 1.0) -> int:
    if not math.isfinite(dt_max):
        return 1
    return max(1, int(math.ceil(horizon / (safety * dt_max) - 1e-12)))


def build_grid(spec: ProblemSpec, nodes_per_axis: Union[int, Sequence[int]] = 101,
               n_t: Optional[int] = None, dt: Optional[float] = None,
               cfl_safety: float = DEFAULT_CFL_SAFETY) -> LatticeGrid:
    """
    Build a lattice, choosing n_t from the CFL bound when neither n_t nor dt
    is given. An explicit n_t or dt that violates the bound raises CflError.
    """
    if n_t is not None and dt is not None:
        raise PreconditionError("give n_t or dt, not both")
    if dt is not None:
        if not dt > 0:
            raise PreconditionError(f"dt must be positive, got {dt}")
        n_t = int(round(spec.horizon / dt))
        if n_t < 1 or abs(n_t * dt - spec.horizon) > 1e-9 * spec.horizon:
            raise PreconditionError(f"dt={dt} does not divide the horizon {spec.horizon}")
    if n_t is None:
        unit_step = LatticeGrid(spec, nodes_per_axis, 1, check_cfl=False)
        n_t = suggested_n_t(spec.horizon, unit_step.cfl.dt_max, cfl_safety)
    grid = LatticeGrid(spec, nodes_per_axis, n_t)
    logger.debug("Grid %s, n_t=%d, dt=%.6g (bound %.6g)", grid.shape, grid.n_t, grid.dt, grid.cfl.dt_max)
    return grid


@dataclass
class ValueField:
    """phi_i tabulated on [n_t+1, nodes]."""
    player: Player
    values: np.ndarray


@dataclass
class PolicyField:
    """Control-set indices of v* and w* on [n_t, nodes]."""
    leader: np.ndarray
    follower: np.ndarray
    leader_size: int = field(default=0)
    follower_size: int = field(default=0)

    def __post_init__(self):
        for name, table, size in (("leader", self.leader, self.leader_size),
                                  ("follower", self.follower, self.follower_size)):
            if size and (table.min(initial=0) < 0 or table.max(initial=0) >= size):
                raise PreconditionError(f"{name} policy holds indices outside [0, {size})")
