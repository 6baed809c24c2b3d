"""
Naive node-by-node sweep of the coupled scheme.

A straight-line rendition of the two-loop recursion (follower inner loop,
leader outer loop) with scalar stencils, used as an oracle for the batched
sweep on tiny instances. It follows the same floating-point operation order
as ``hrc.hjb.operators`` so both agree bit for bit.
"""

from typing import List, Sequence, Tuple

import numpy as np

from ..core.problem import Player, ProblemSpec
from .grid import LatticeGrid


def _value(phi: np.ndarray, index: List[int]) -> float:
    """Slice value with linear ghost extrapolation outside the grid (last axis resolved first)."""
    shape = phi.shape
    for axis in reversed(range(len(shape))):
        i = index[axis]
        if i < 0 or i >= shape[axis]:
            edge, inner = (0, 1) if i < 0 else (shape[axis] - 1, shape[axis] - 2)
            at_edge = list(index)
            at_edge[axis] = edge
            at_inner = list(index)
            at_inner[axis] = inner
            return 2.0 * _value(phi, at_edge) - _value(phi, at_inner)
    return float(phi[tuple(index)])


def _moved(index: Sequence[int], **offsets) -> List[int]:
    out = list(index)
    for axis, step in offsets.items():
        out[int(axis[1:])] += step
    return out


def _expression(spec: ProblemSpec, player: Player, grid: LatticeGrid, phi: np.ndarray,
                node: int, t: float, v: np.ndarray, w: np.ndarray) -> float:
    d = grid.dim
    index = list(np.unravel_index(node, grid.shape))
    x = grid.nodes[node:node + 1]
    v1, w1 = v[None, :], w[None, :]
    f = spec.drift(t, x, v1, w1)[0]
    sigma = spec.diffusion(t, x, v1, w1)[0]
    h = grid.h
    centre = _value(phi, index)

    grad = []
    for i in range(d):
        up = _value(phi, _moved(index, **{f"a{i}": 1}))
        down = _value(phi, _moved(index, **{f"a{i}": -1}))
        if f[i] > 0:
            grad.append((up - centre) / h[i])
        elif f[i] < 0:
            grad.append((centre - down) / h[i])
        else:
            grad.append((up - down) / (2.0 * h[i]))

    acc = 0.0
    for i in range(d):
        for j in range(d):
            a_ij = 0.0
            for k in range(d):
                a_ij = a_ij + sigma[i, k] * sigma[j, k]
            if i == j:
                up = _value(phi, _moved(index, **{f"a{i}": 1}))
                down = _value(phi, _moved(index, **{f"a{i}": -1}))
                second = ((up - 2.0 * centre) + down) / (h[i] * h[i])
            else:
                def corner(si, sj):
                    return _value(phi, _moved(index, **{f"a{i}": si, f"a{j}": sj}))
                cross = ((corner(1, 1) - corner(1, -1)) - corner(-1, 1)) + corner(-1, -1)
                second = cross / (4.0 * h[i] * h[j])
            acc = acc + a_ij * second
    op = 0.5 * acc
    for i in range(d):
        op = op + f[i] * grad[i]

    z = np.empty(d)
    for j in range(d):
        zj = 0.0
        for i in range(d):
            zj = zj + grad[i] * sigma[i, j]
        z[j] = zj
    cost = spec.running_cost(player, t, x, v1, w1)[0]
    return float((cost + op) + spec.generator(player)(t, z[None, :])[0])


def reference_sweep(spec: ProblemSpec, grid: LatticeGrid
                    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(phi1, phi2, v*, w*) of the coupled scheme, one node and one control pair at a time."""
    n, n_t = grid.n_nodes, grid.n_t
    phi1 = np.zeros((n_t + 1, n))
    phi2 = np.zeros((n_t + 1, n))
    v_table = np.zeros((n_t, n), dtype=int)
    w_table = np.zeros((n_t, n), dtype=int)
    for node in range(n):
        x = grid.nodes[node:node + 1]
        phi1[n_t, node] = spec.leader_terminal(x)[0]
        phi2[n_t, node] = spec.follower_terminal(x)[0]

    leader_points = spec.leader_controls.points
    follower_points = spec.follower_controls.points
    for k in range(n_t - 1, -1, -1):
        t = grid.times[k]
        leader_next = phi1[k + 1].reshape(grid.shape)
        follower_next = phi2[k + 1].reshape(grid.shape)
        for node in range(n):
            best_leader = None
            for iv, v in enumerate(leader_points):
                best_follower, best_w = None, 0
                for iw, w in enumerate(follower_points):
                    e2 = _expression(spec, Player.FOLLOWER, grid, follower_next, node, t, v, w)
                    if best_follower is None or e2 < best_follower:
                        best_follower, best_w = e2, iw
                e1 = _expression(spec, Player.LEADER, grid, leader_next, node, t, v,
                                 follower_points[best_w])
                if best_leader is None or e1 < best_leader[0]:
                    best_leader = (e1, best_follower, iv, best_w)
            h1, h2, iv, iw = best_leader
            phi1[k, node] = phi1[k + 1, node] + grid.dt * h1
            phi2[k, node] = phi2[k + 1, node] + grid.dt * h2
            v_table[k, node] = iv
            w_table[k, node] = iw
    return phi1, phi2, v_table, w_table
