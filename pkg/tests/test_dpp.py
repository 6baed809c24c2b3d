"""
Dynamic Programming Tests

Tests of the discrete dynamic-programming identity of the backward sweep.
"""

import pytest

from hrc.core import Player, PreconditionError
from hrc.hjb import LatticeGrid, backward_sweep_hierarchical, dpp_residual
from hrc.hjb.dpp import replay


class TestDppResidual:
    """Test cases for replaying the sweep from a stored slice."""

    @pytest.fixture
    def lq_solution(self, lq_spec):
        return backward_sweep_hierarchical(lq_spec, nodes_per_axis=21)

    def test_unchanged_step_is_exact(self, lq_spec, lq_solution):
        """Test that replaying with the same dt reproduces the stored value."""
        for r_steps in (1, lq_solution.grid.n_t // 2):
            for player in Player:
                assert dpp_residual(lq_spec, lq_solution, player, r_steps) == 0.0

    def test_full_horizon_replay(self, lq_spec, lq_solution):
        """Test r_steps = n_t replays the whole sweep exactly."""
        phi1, phi2 = replay(lq_spec, lq_solution, lq_solution.grid.n_t)

        assert (phi1 == lq_solution.leader.values[0]).all()
        assert (phi2 == lq_solution.follower.values[0]).all()

    def test_refined_replay_is_first_order(self, ou_spec):
        """Test the refined-replay residual roughly halves when dt halves."""
        residuals = []
        for n_t in (40, 80):
            solution = backward_sweep_hierarchical(ou_spec, LatticeGrid(ou_spec, 41, n_t))
            residuals.append(dpp_residual(ou_spec, solution, Player.LEADER, n_t, refine=2))

        assert residuals[1] > 0.0
        assert 1.5 <= residuals[0] / residuals[1] <= 3.0

    def test_heat_is_exact_in_time(self, heat_spec):
        """Test that refining dt leaves x^2 + s^2 (T - t) unchanged away from the faces."""
        solution = backward_sweep_hierarchical(heat_spec, LatticeGrid(heat_spec, 41, 20))
        assert dpp_residual(heat_spec, solution, Player.FOLLOWER, 20, refine=2) < 1e-8

    def test_argument_checks(self, lq_spec, lq_solution):
        """Test r_steps and refine ranges."""
        with pytest.raises(PreconditionError):
            dpp_residual(lq_spec, lq_solution, Player.LEADER, 0)
        with pytest.raises(PreconditionError):
            dpp_residual(lq_spec, lq_solution, Player.LEADER, lq_solution.grid.n_t + 1)
        with pytest.raises(PreconditionError):
            dpp_residual(lq_spec, lq_solution, Player.LEADER, 1, refine=0)
