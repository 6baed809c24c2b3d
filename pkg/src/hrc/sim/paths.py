"""
Euler-Maruyama simulation of the controlled diffusion and pathwise
accumulated risk-costs.

Brownian increments come from per-block random substreams keyed by
(seed, block index) with a fixed block size, so a path's increments depend
only on (seed, path index) and not on how blocks are scheduled on threads.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, Optional

import numpy as np

from ..core.catalog import builtin_problem
from ..core.errors import PreconditionError
from ..core.problem import Player, ProblemSpec
from .policies import ConstantPolicy, FeedbackPolicy


logger = logging.getLogger(__name__)

DEFAULT_BLOCK_SIZE = 4096


@dataclass(frozen=True)
class PathBundle:
    """Monte-Carlo ensemble of controlled state paths on a uniform time grid."""
    n_paths: int
    n_steps: int
    dt: float
    t0: float
    states: np.ndarray
    increments: np.ndarray
    leader_controls_applied: np.ndarray
    follower_controls_applied: np.ndarray
    seed: int
    spec_digest: str = ""
    metadata: Dict[str, object] = field(default_factory=dict, compare=False)

    @property
    def dim(self) -> int:
        return self.states.shape[2]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_steps + 1)

    @property
    def terminal_states(self) -> np.ndarray:
        return self.states[:, -1, :]

    def head(self, r_steps: int) -> "PathBundle":
        """The bundle restricted to steps 0..r_steps."""
        if not 0 <= r_steps <= self.n_steps:
            raise PreconditionError(f"r_steps must be in [0, {self.n_steps}], got {r_steps}")
        return replace(
            self,
            n_steps=r_steps,
            states=self.states[:, :r_steps + 1],
            increments=self.increments[:, :r_steps],
            leader_controls_applied=self.leader_controls_applied[:, :r_steps],
            follower_controls_applied=self.follower_controls_applied[:, :r_steps],
        )

    def permuted(self, order: np.ndarray) -> "PathBundle":
        """The same paths in another order."""
        order = np.asarray(order)
        return replace(
            self,
            states=self.states[order],
            increments=self.increments[order],
            leader_controls_applied=self.leader_controls_applied[order],
            follower_controls_applied=self.follower_controls_applied[order],
        )


def resolve_steps(horizon: float, dt: float) -> int:
    """Number of steps of size dt covering the horizon; dt must divide it."""
    if not dt > 0:
        raise PreconditionError(f"dt must be positive, got {dt}")
    n_steps = int(round(horizon / dt))
    if n_steps < 1 or abs(n_steps * dt - horizon) > 1e-9 * horizon:
        raise PreconditionError(f"dt={dt} does not divide the horizon {horizon}")
    return n_steps


def block_increments(seed: int, block: int, n_paths: int, n_steps: int, dim: int,
                     dt: float) -> np.ndarray:
    """Brownian increments for one block of paths."""
    stream = np.random.SeedSequence(entropy=seed, spawn_key=(block,))
    rng = np.random.Generator(np.random.PCG64(stream))
    return rng.standard_normal((n_paths, n_steps, dim)) * math.sqrt(dt)


def _diffusion_times_increment(sigma: np.ndarray, db: np.ndarray) -> np.ndarray:
    n, d, _ = sigma.shape
    out = np.zeros((n, d))
    for i in range(d):
        acc = np.zeros(n)
        for j in range(d):
            acc = acc + sigma[:, i, j] * db[:, j]
        out[:, i] = acc
    return out


def simulate(spec: ProblemSpec, leader: FeedbackPolicy, follower: FeedbackPolicy,
             n_paths: int, dt: float, seed: int, threads: int = 1,
             block_size: int = DEFAULT_BLOCK_SIZE) -> PathBundle:
    """
    Simulate X_{k+1} = X_k + f dt + sigma dB_k with controls read from the
    feedback policies at (t_k, X_k).
    """
    if n_paths < 1:
        raise PreconditionError(f"n_paths must be >= 1, got {n_paths}")
    n_steps = resolve_steps(spec.horizon, dt)
    dt = spec.horizon / n_steps
    d = spec.dim
    mv, mw = spec.leader_controls.dim, spec.follower_controls.dim

    states = np.empty((n_paths, n_steps + 1, d))
    increments = np.empty((n_paths, n_steps, d))
    v_applied = np.empty((n_paths, n_steps, mv))
    w_applied = np.empty((n_paths, n_steps, mw))

    def run_block(block: int):
        start = block * block_size
        stop = min(start + block_size, n_paths)
        db = block_increments(seed, block, stop - start, n_steps, d, dt)
        x = np.broadcast_to(spec.x0, (stop - start, d)).copy()
        states[start:stop, 0] = x
        for k in range(n_steps):
            t = k * dt
            v = leader(t, x)
            w = follower(t, x)
            sigma = spec.diffusion(t, x, v, w)
            x = x + spec.drift(t, x, v, w) * dt + _diffusion_times_increment(sigma, db[:, k])
            states[start:stop, k + 1] = x
            v_applied[start:stop, k] = v
            w_applied[start:stop, k] = w
        increments[start:stop] = db

    n_blocks = -(-n_paths // block_size)
    if threads > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_block, range(n_blocks)))
    else:
        for block in range(n_blocks):
            run_block(block)

    for array in (states, increments, v_applied, w_applied):
        array.setflags(write=False)
    logger.info("Simulated %d paths x %d steps (dt=%.6g, seed=%d)", n_paths, n_steps, dt, seed)
    return PathBundle(
        n_paths=n_paths,
        n_steps=n_steps,
        dt=dt,
        t0=0.0,
        states=states,
        increments=increments,
        leader_controls_applied=v_applied,
        follower_controls_applied=w_applied,
        seed=seed,
        spec_digest=spec.digest,
        metadata={"leader_policy": repr(leader), "follower_policy": repr(follower),
                  "block_size": block_size},
    )


def running_cost_integral(bundle: PathBundle, spec: ProblemSpec, player: Player) -> np.ndarray:
    """Left-endpoint integral of the player's running cost up to each step, [n_paths, n_steps+1]."""
    try:
        player = Player(player)
    except ValueError:
        raise PreconditionError(f"unknown player '{player}'")
    if bundle.spec_digest and bundle.spec_digest != spec.digest:
        raise PreconditionError("bundle was simulated with a different problem")
    out = np.zeros((bundle.n_paths, bundle.n_steps + 1))
    acc = np.zeros(bundle.n_paths)
    for k in range(bundle.n_steps):
        t = bundle.t0 + k * bundle.dt
        c = spec.running_cost(player, t, bundle.states[:, k],
                              bundle.leader_controls_applied[:, k],
                              bundle.follower_controls_applied[:, k])
        acc = acc + c * bundle.dt
        out[:, k + 1] = acc
    return out


def accumulate_cost(bundle: PathBundle, spec: ProblemSpec, player: Player) -> np.ndarray:
    """Accumulated risk-cost per path: running cost integral plus Psi(X_T)."""
    running = running_cost_integral(bundle, spec, player)
    return running[:, -1] + spec.terminal(Player(player))(bundle.terminal_states)


def brownian_only(dim: int, horizon: float, dt: float, n_paths: int, seed: int,
                  threads: int = 1) -> PathBundle:
    """Bundle with f = 0, sigma = identity, x0 = 0, i.e. X = B."""
    spec = builtin_problem("brownian", params={"dim": dim, "horizon": horizon})
    zero_v = ConstantPolicy(spec.leader_controls, [0.0])
    zero_w = ConstantPolicy(spec.follower_controls, [0.0])
    return simulate(spec, zero_v, zero_w, n_paths, dt, seed, threads=threads)


def constant_policies(spec: ProblemSpec, v: Optional[np.ndarray] = None,
                      w: Optional[np.ndarray] = None):
    """Constant policies at the given points (default: first control of each set)."""
    leader = ConstantPolicy(spec.leader_controls, spec.leader_controls.point(0) if v is None else v)
    follower = ConstantPolicy(spec.follower_controls, spec.follower_controls.point(0) if w is None else w)
    return leader, follower
