"""
HJB Operator Tests

Unit tests for the lattice, the discrete generator and the single-node
follower/leader minimizations.
"""

import numpy as np
import pytest

from hrc.core import CflError, PreconditionError, builtin_config, build_problem
from hrc.hjb import (
    GridSlice, LatticeGrid, apply_operator, best_response_set, build_grid, follower_hamiltonian,
    gradient, leader_step,
)
from hrc.hjb.operators import ghost_pad, leader_expression, slice_derivatives


@pytest.fixture
def unit_heat_spec():
    """f = 0, sigma = 1 on [-4, 4]."""
    return build_problem(builtin_config(
        "heat", diffusion={"family": "constant-diffusion", "matrix": [[1.0]]}))


def _slice(spec, nodes, fn, t=0.0):
    grid = LatticeGrid(spec, nodes, 1, check_cfl=False)
    return GridSlice(grid, fn(grid.nodes[:, 0]), t)


class TestLatticeGrid:
    """Test cases for the space-time lattice."""

    def test_geometry(self, heat_spec):
        """Test spacing, node order and time grid."""
        grid = LatticeGrid(heat_spec, 9, 4, check_cfl=False)

        assert grid.h == (1.0,)
        assert grid.n_nodes == 9
        np.testing.assert_array_equal(grid.nodes[:, 0], np.arange(-4.0, 5.0))
        np.testing.assert_allclose(grid.times, [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_two_dimensional_c_order(self):
        """Test flat node indices with the last axis fastest."""
        spec = build_problem(builtin_config("brownian", params={"dim": 2}))
        grid = LatticeGrid(spec, (3, 4), 1, check_cfl=False)

        assert grid.shape == (3, 4)
        np.testing.assert_array_equal(grid.nodes[1], [grid.axes[0][0], grid.axes[1][1]])
        np.testing.assert_array_equal(grid.nodes[5], [grid.axes[0][1], grid.axes[1][1]])
        np.testing.assert_array_equal(grid.nodes[11], [grid.axes[0][2], grid.axes[1][3]])

    def test_locators(self, heat_spec):
        """Test nearest-node and time-slice lookup."""
        grid = LatticeGrid(heat_spec, 9, 4, check_cfl=False)

        np.testing.assert_array_equal(grid.nearest_node(np.array([[0.4], [0.6], [-9.0], [9.0]])),
                                      [4, 5, 0, 8])
        assert grid.time_index(0.0) == 0
        assert grid.time_index(0.25) == 1
        assert grid.time_index(0.49) == 1
        assert grid.time_index(1.0) == 3

    def test_interpolate_and_masks(self, heat_spec):
        """Test multilinear interpolation and the interior mask."""
        grid = LatticeGrid(heat_spec, 9, 1, check_cfl=False)
        values = 2.0 * grid.nodes[:, 0] + 1.0

        assert grid.interpolate(values, [0.5]) == pytest.approx(2.0)
        assert grid.interior_mask(0.25).sum() == 5

    def test_cfl_rejection(self, heat_spec):
        """Test that an explicit step above the bound is rejected with a suggestion."""
        with pytest.raises(CflError) as excinfo:
            build_grid(heat_spec, 161, n_t=10)
        error = excinfo.value

        assert error.dt == pytest.approx(0.1)
        assert error.dt_max == pytest.approx(0.05 ** 2 / (2 * 0.25))
        assert error.suggested_n_t * error.dt_max >= heat_spec.horizon - 1e-12
        assert "dt" in str(error)

    def test_cfl_bound_with_drift(self, lq_spec):
        """Test the bound h^2 / (2 d a_max + h f_max d)."""
        grid = LatticeGrid(lq_spec, 31, 1, check_cfl=False)

        assert grid.cfl.a_max == pytest.approx(0.25)
        assert grid.cfl.f_max == pytest.approx(2.0)
        assert grid.cfl.dt_max == pytest.approx(0.04 / (0.5 + 0.4))

    def test_automatic_time_step(self, heat_spec):
        """Test that n_t defaults to a CFL-admissible value."""
        grid = build_grid(heat_spec, 41)
        assert grid.dt <= grid.cfl.dt_max
        assert grid.cfl_number <= 0.9 + 1e-12

    def test_too_few_nodes(self, heat_spec):
        """Test the lattice size precondition."""
        with pytest.raises(PreconditionError):
            LatticeGrid(heat_spec, 1, 1)


class TestStencils:
    """Test cases for finite differences and the boundary closure."""

    def test_ghost_layer_is_linear(self):
        """Test linear extrapolation across each face."""
        padded = ghost_pad(np.array([1.0, 4.0, 9.0]))
        np.testing.assert_array_equal(padded, [-2.0, 1.0, 4.0, 9.0, 14.0])

    def test_boundary_curvature_vanishes(self, heat_spec):
        """Test zero second difference at the faces."""
        slice_ = _slice(heat_spec, 9, lambda x: x * x)
        second = slice_derivatives(slice_.grid, slice_.values).second[0, 0]

        assert second[0] == 0.0
        assert second[-1] == 0.0
        np.testing.assert_array_equal(second[1:-1], 2.0)

    def test_cross_difference(self):
        """Test the four-point cross difference on phi = x y."""
        spec = build_problem(builtin_config("brownian", params={"dim": 2}))
        grid = LatticeGrid(spec, 11, 1, check_cfl=False)
        values = grid.nodes[:, 0] * grid.nodes[:, 1]
        second = slice_derivatives(grid, values).second

        np.testing.assert_allclose(second[0, 1], 1.0, rtol=1e-12)
        np.testing.assert_allclose(second[1, 0], 1.0, rtol=1e-12)
        np.testing.assert_allclose(second[0, 0], 0.0, atol=1e-12)


class TestApplyOperator:
    """Test cases for L^{v,w} phi at a node."""

    def test_constant_slice(self, lq_spec):
        """Test that derivatives of a constant vanish."""
        slice_ = _slice(lq_spec, 7, lambda x: np.full_like(x, 3.0))
        for v in ([-1.0], [0.5]):
            for w in ([0.0], [1.0]):
                assert apply_operator(slice_, 3, lq_spec, v, w) == 0.0

    def test_linear_slice_under_drift(self, lq_spec):
        """Test f = v + w = 1.5 on phi = x."""
        slice_ = _slice(lq_spec, 7, lambda x: x)
        assert apply_operator(slice_, 3, lq_spec, [1.0], [0.5]) == pytest.approx(1.5)
        np.testing.assert_allclose(gradient(slice_, 3, lq_spec, [1.0], [0.5]), [1.0])

    def test_quadratic_slice_under_diffusion(self, unit_heat_spec):
        """Test (1/2) a phi'' = 1 for phi = x^2 and a = 1."""
        slice_ = _slice(unit_heat_spec, 9, lambda x: x * x)
        assert apply_operator(slice_, 5, unit_heat_spec, [0.0], [0.0]) == pytest.approx(1.0)

    def test_upwind_direction(self, lq_spec):
        """Test that the first difference follows the drift sign."""
        slice_ = _slice(lq_spec, 7, lambda x: x * x)
        node = 4  # x = 1
        assert gradient(slice_, node, lq_spec, [1.0], [0.0])[0] == pytest.approx(3.0)
        assert gradient(slice_, node, lq_spec, [-1.0], [0.0])[0] == pytest.approx(1.0)
        assert gradient(slice_, node, lq_spec, [0.0], [0.0])[0] == pytest.approx(2.0)


class TestFollowerHamiltonian:
    """Test cases for the follower minimization at a node."""

    def test_control_cost_only(self, decoupled_spec):
        """Test min over {-1, 0, 1} of w^2."""
        slice_ = _slice(decoupled_spec, 7, np.zeros_like)
        value, index = follower_hamiltonian(slice_, 3, decoupled_spec, [0.0])

        assert value == 0.0
        assert decoupled_spec.follower_controls.point(index)[0] == 0.0

    def test_drift_contribution(self, decoupled_spec):
        """Test w^2 + 1.5 w over {-1, 0, 1}."""
        slice_ = _slice(decoupled_spec, 7, lambda x: 1.5 * x)
        value, index = follower_hamiltonian(slice_, 3, decoupled_spec, [0.0])

        assert value == pytest.approx(-0.5)
        assert index == 0

    def test_singleton_follower_set(self, heat_spec):
        """Test that a singleton set returns its only control."""
        slice_ = _slice(heat_spec, 9, lambda x: x * x)
        value, index = follower_hamiltonian(slice_, 4, heat_spec, [0.0])

        assert index == 0
        assert value == pytest.approx(0.25)

    def test_best_response_set_with_ties(self, zero_cost_spec):
        """Test that every control is a best response on a zero slice."""
        slice_ = _slice(zero_cost_spec, 7, np.zeros_like)

        assert best_response_set(slice_, 3, zero_cost_spec, [0.0]) == [0, 1, 2]
        assert follower_hamiltonian(slice_, 3, zero_cost_spec, [0.0]) == (0.0, 0)

    def test_best_response_set_unique(self, decoupled_spec):
        """Test a strict minimizer gives a singleton set."""
        slice_ = _slice(decoupled_spec, 7, lambda x: 1.5 * x)
        assert best_response_set(slice_, 3, decoupled_spec, [0.0]) == [0]


class TestLeaderStep:
    """Test cases for the nested leader minimization at a node."""

    def test_singleton_sets(self, heat_spec):
        """Test that singleton V, W reduce to direct evaluation."""
        slice_ = _slice(heat_spec, 9, lambda x: x * x)
        h1, h2, v_star, w_star = leader_step(slice_, slice_, 4, heat_spec)

        assert (v_star, w_star) == (0, 0)
        assert h1 == pytest.approx(0.25)
        assert h2 == pytest.approx(0.25)

    def test_decoupled_minimum(self, decoupled_spec):
        """Test v* = w* = 0 when the slices are flat."""
        flat = _slice(decoupled_spec, 7, np.zeros_like)
        h1, h2, v_star, w_star = leader_step(flat, flat, 3, decoupled_spec)

        assert (h1, h2) == (0.0, 0.0)
        assert decoupled_spec.leader_controls.point(v_star)[0] == 0.0
        assert decoupled_spec.follower_controls.point(w_star)[0] == 0.0

    def test_leader_anticipates_follower(self, decoupled_spec):
        """Test that h1 is the least leader expression over V with w = S(v)."""
        leader_slice = _slice(decoupled_spec, 7, lambda x: -2.0 * x)
        follower_slice = _slice(decoupled_spec, 7, lambda x: 1.5 * x)
        h1, h2, v_star, w_star = leader_step(leader_slice, follower_slice, 3, decoupled_spec)

        candidates = [leader_expression(leader_slice, follower_slice, 3, decoupled_spec, i)
                      for i in range(decoupled_spec.leader_controls.size)]
        assert h1 == min(value for value, _ in candidates)
        assert candidates[v_star] == (h1, w_star)
        assert h2 == follower_hamiltonian(follower_slice, 3, decoupled_spec,
                                          decoupled_spec.leader_controls.point(v_star))[0]
