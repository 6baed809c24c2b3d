"""
Discrete generator L^{v,w} phi = 1/2 tr(a D^2 phi) + f . D phi and the
nested follower/leader minimizations of the explicit HJB scheme.

Stencils:
  - boundary closure by linear ghost extrapolation (zero curvature);
  - central second differences, four-point cross differences for d = 2;
  - first differences upwinded per sign of the drift component, central
    where the component vanishes.

Every accumulation is an explicit loop over the coordinate axes in a fixed
order, so node-by-node evaluation reproduces the batched kernels exactly.
Argmins take the first (lexicographically smallest) control index.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..core.problem import Player, ProblemSpec
from .grid import LatticeGrid


@dataclass
class GridSlice:
    """Values at t_{k+1} and the time t_k at which coefficients are frozen."""
    grid: LatticeGrid
    values: np.ndarray
    t: float


@dataclass
class SliceDerivatives:
    """Finite differences of one slice, per node."""
    forward: np.ndarray    # [d, n]
    backward: np.ndarray   # [d, n]
    central: np.ndarray    # [d, n]
    second: np.ndarray     # [d, d, n]

    def take(self, nodes: np.ndarray) -> "SliceDerivatives":
        return SliceDerivatives(self.forward[:, nodes], self.backward[:, nodes],
                                self.central[:, nodes], self.second[:, :, nodes])


def ghost_pad(grid_values: np.ndarray) -> np.ndarray:
    """Pad one ghost layer per face by linear extrapolation, axis by axis."""
    padded = grid_values
    for axis in range(padded.ndim):
        first = np.take(padded, [0], axis=axis)
        second = np.take(padded, [1], axis=axis)
        last = np.take(padded, [-1], axis=axis)
        before_last = np.take(padded, [-2], axis=axis)
        padded = np.concatenate([2.0 * first - second, padded, 2.0 * last - before_last], axis=axis)
    return padded


def _shifted(padded: np.ndarray, offsets: Sequence[int]) -> np.ndarray:
    index = tuple(slice(1 + o, padded.shape[i] - 1 + o) for i, o in enumerate(offsets))
    return padded[index]


def slice_derivatives(grid: LatticeGrid, values: np.ndarray) -> SliceDerivatives:
    d = grid.dim
    padded = ghost_pad(np.asarray(values, dtype=float).reshape(grid.shape))
    centre = _shifted(padded, (0,) * d)
    n = grid.n_nodes
    forward = np.empty((d, n))
    backward = np.empty((d, n))
    central = np.empty((d, n))
    second = np.empty((d, d, n))
    for i in range(d):
        plus = tuple(1 if j == i else 0 for j in range(d))
        minus = tuple(-1 if j == i else 0 for j in range(d))
        up = _shifted(padded, plus)
        down = _shifted(padded, minus)
        h = grid.h[i]
        forward[i] = ((up - centre) / h).ravel()
        backward[i] = ((centre - down) / h).ravel()
        central[i] = ((up - down) / (2.0 * h)).ravel()
        second[i, i] = (((up - 2.0 * centre) + down) / (h * h)).ravel()
    for i in range(d):
        for j in range(d):
            if i == j:
                continue
            def corner(si, sj):
                return _shifted(padded, tuple(si if m == i else sj if m == j else 0 for m in range(d)))
            cross = ((corner(1, 1) - corner(1, -1)) - corner(-1, 1)) + corner(-1, -1)
            second[i, j] = (cross / (4.0 * grid.h[i] * grid.h[j])).ravel()
    return SliceDerivatives(forward, backward, central, second)


def _upwind(deriv: SliceDerivatives, f: np.ndarray) -> np.ndarray:
    """Per-node first derivative chosen by the sign of each drift component, [n, d]."""
    f = f.T
    return np.where(f > 0, deriv.forward, np.where(f < 0, deriv.backward, deriv.central)).T


def _covariance(sigma: np.ndarray) -> np.ndarray:
    n, d, _ = sigma.shape
    a = np.empty((n, d, d))
    for i in range(d):
        for j in range(d):
            acc = np.zeros(n)
            for k in range(d):
                acc = acc + sigma[:, i, k] * sigma[:, j, k]
            a[:, i, j] = acc
    return a


def _broadcast_controls(u: np.ndarray, n: int) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return np.broadcast_to(u, (n, u.shape[-1])) if u.ndim == 1 else u


def operator_terms(spec: ProblemSpec, t: float, x: np.ndarray, deriv: SliceDerivatives,
                   v: np.ndarray, w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(L phi, D phi . sigma) at the nodes x for controls v, w (points or per-node arrays)."""
    n, d = x.shape
    v = _broadcast_controls(v, n)
    w = _broadcast_controls(w, n)
    f = spec.drift(t, x, v, w)
    sigma = spec.diffusion(t, x, v, w)
    a = _covariance(sigma)
    grad = _upwind(deriv, f)
    acc = np.zeros(n)
    for i in range(d):
        for j in range(d):
            acc = acc + a[:, i, j] * deriv.second[i, j]
    value = 0.5 * acc
    for i in range(d):
        value = value + f[:, i] * grad[:, i]
    z = np.empty((n, d))
    for j in range(d):
        zj = np.zeros(n)
        for i in range(d):
            zj = zj + grad[:, i] * sigma[:, i, j]
        z[:, j] = zj
    return value, z


def player_expression(spec: ProblemSpec, player: Player, t: float, x: np.ndarray,
                      deriv: SliceDerivatives, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """c_i + L^{v,w} phi_i + g_i(t, D phi_i . sigma) at the nodes x."""
    n = x.shape[0]
    v = _broadcast_controls(v, n)
    w = _broadcast_controls(w, n)
    op, z = operator_terms(spec, t, x, deriv, v, w)
    cost = spec.running_cost(player, t, x, v, w)
    return (cost + op) + spec.generator(player)(t, z)


def first_argmin(values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Column-wise (min, first argmin) of a [choices, n] array."""
    index = np.argmin(values, axis=0)
    return values[index, np.arange(values.shape[1])], index


@dataclass
class StepResult:
    """Decisions and Hamiltonian values of one explicit step on a node subset."""
    h1: np.ndarray
    h2: np.ndarray
    v_star: np.ndarray
    w_star: np.ndarray
    follower_ties: np.ndarray
    leader_ties: np.ndarray


def follower_table(spec: ProblemSpec, t: float, x: np.ndarray, deriv: SliceDerivatives,
                   v: np.ndarray) -> np.ndarray:
    """Follower expression for every w in W, [|W|, n]."""
    return np.stack([player_expression(spec, Player.FOLLOWER, t, x, deriv, v, w)
                     for w in spec.follower_controls.points])


def hierarchical_kernel(spec: ProblemSpec, t: float, x: np.ndarray,
                        leader_deriv: SliceDerivatives, follower_deriv: SliceDerivatives,
                        tie_tol: float = 0.0) -> StepResult:
    """Inner follower argmin S(v) for every v, then the outer leader argmin."""
    n = x.shape[0]
    leader_points = spec.leader_controls.points
    follower_points = spec.follower_controls.points
    e1 = np.empty((len(leader_points), n))
    e2 = np.empty((len(leader_points), n))
    s_of_v = np.empty((len(leader_points), n), dtype=int)
    ties_of_v = np.empty((len(leader_points), n), dtype=bool)
    for iv, v in enumerate(leader_points):
        table = follower_table(spec, t, x, follower_deriv, v)
        e2[iv], s_of_v[iv] = first_argmin(table)
        ties_of_v[iv] = np.sum(table <= e2[iv] + tie_tol, axis=0) > 1
        e1[iv] = player_expression(spec, Player.LEADER, t, x, leader_deriv, v,
                                   follower_points[s_of_v[iv]])
    h1, v_star = first_argmin(e1)
    columns = np.arange(n)
    return StepResult(
        h1=h1,
        h2=e2[v_star, columns],
        v_star=v_star,
        w_star=s_of_v[v_star, columns],
        follower_ties=ties_of_v[v_star, columns],
        leader_ties=np.sum(e1 <= h1 + tie_tol, axis=0) > 1,
    )


def follower_kernel(spec: ProblemSpec, t: float, x: np.ndarray, deriv: SliceDerivatives,
                    v: np.ndarray, tie_tol: float = 0.0) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(min_w expression, first argmin, tie mask) for per-node leader controls v."""
    table = follower_table(spec, t, x, deriv, v)
    best, index = first_argmin(table)
    return best, index, np.sum(table <= best + tie_tol, axis=0) > 1


# Single-node views of the kernels.

def _node_view(slice_: GridSlice, node: int) -> Tuple[np.ndarray, SliceDerivatives]:
    deriv = slice_derivatives(slice_.grid, slice_.values).take(np.array([node]))
    return slice_.grid.nodes[node:node + 1], deriv


def apply_operator(slice_: GridSlice, node: int, spec: ProblemSpec,
                   v: Sequence[float], w: Sequence[float]) -> float:
    """(1/2) tr(a D^2 phi) + f . D phi at one node."""
    x, deriv = _node_view(slice_, node)
    value, _ = operator_terms(spec, slice_.t, x, deriv, np.asarray(v, float), np.asarray(w, float))
    return float(value[0])


def gradient(slice_: GridSlice, node: int, spec: ProblemSpec,
             v: Sequence[float], w: Sequence[float]) -> np.ndarray:
    """Upwind-consistent D phi at one node."""
    x, deriv = _node_view(slice_, node)
    f = spec.drift(slice_.t, x, np.atleast_2d(np.asarray(v, float)), np.atleast_2d(np.asarray(w, float)))
    return _upwind(deriv, f)[0]


def follower_hamiltonian(slice_: GridSlice, node: int, spec: ProblemSpec,
                         v: Sequence[float]) -> Tuple[float, int]:
    """min over W of c2 + L phi2 + g2(D phi2 . sigma), with the first argmin index."""
    x, deriv = _node_view(slice_, node)
    table = follower_table(spec, slice_.t, x, deriv, np.asarray(v, float))
    best, index = first_argmin(table)
    return float(best[0]), int(index[0])


def best_response_set(slice_: GridSlice, node: int, spec: ProblemSpec,
                      v: Sequence[float], tol: float = 1e-12) -> List[int]:
    """Sorted follower indices whose expression is within tol of the minimum."""
    x, deriv = _node_view(slice_, node)
    table = follower_table(spec, slice_.t, x, deriv, np.asarray(v, float))[:, 0]
    return [int(i) for i in np.nonzero(table <= table.min() + tol)[0]]


def leader_step(leader_slice: GridSlice, follower_slice: GridSlice, node: int,
                spec: ProblemSpec) -> Tuple[float, float, int, int]:
    """(h1, h2, v*, w*) at one node: follower best response nested in the leader argmin."""
    x = leader_slice.grid.nodes[node:node + 1]
    idx = np.array([node])
    result = hierarchical_kernel(
        spec, leader_slice.t, x,
        slice_derivatives(leader_slice.grid, leader_slice.values).take(idx),
        slice_derivatives(follower_slice.grid, follower_slice.values).take(idx),
    )
    return float(result.h1[0]), float(result.h2[0]), int(result.v_star[0]), int(result.w_star[0])


def leader_expression(leader_slice: GridSlice, follower_slice: GridSlice, node: int,
                      spec: ProblemSpec, v_index: int) -> Tuple[float, int]:
    """Leader expression at v = V[v_index] with w = S(v), and that S(v)."""
    v = spec.leader_controls.point(v_index)
    _, w_index = follower_hamiltonian(follower_slice, node, spec, v)
    x, deriv = _node_view(leader_slice, node)
    value = player_expression(spec, Player.LEADER, leader_slice.t, x, deriv, v,
                              spec.follower_controls.point(w_index))
    return float(value[0]), w_index
