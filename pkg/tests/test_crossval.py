"""
Cross-validation Tests

Tests comparing grid values with Monte-Carlo risk values of the solved
strategies, and pointwise leader optimality.
"""

import numpy as np
import pytest

from hrc.bsde import evaluate_risk_value, risk_value
from hrc.core import Player, PreconditionError, builtin_config, build_problem
from hrc.hjb import (
    backward_sweep_hierarchical, cross_validate, leader_deviation_gain, policies_from_solution,
)
from hrc.sim import ConstantPolicy


class TestCrossValidate:
    """Test cases for grid versus Monte-Carlo agreement."""

    def test_zero_cost(self, zero_cost_spec):
        """Test both gaps vanish when all costs are zero."""
        solution = backward_sweep_hierarchical(zero_cost_spec, nodes_per_axis=21)
        report = cross_validate(zero_cost_spec, solution, 1024, 1.0 / 8, seed=0)

        assert max(report.gaps) <= 1e-6
        assert report.to_dict()["gaps"] == list(report.gaps)

    def test_heat(self, heat_spec):
        """Test the shared closed form x0^2 + s^2 T."""
        solution = backward_sweep_hierarchical(heat_spec, nodes_per_axis=81)
        report = cross_validate(heat_spec, solution, 4096, 1.0 / 16, seed=1)
        gap_1, gap_2 = report.gaps

        assert gap_1 <= 0.02 * 0.5 + 3.0 * report.standard_error_1
        assert gap_2 <= 0.02 * 0.5 + 3.0 * report.standard_error_2
        assert report.grid_value_1 == pytest.approx(0.5, rel=0.02)

    @pytest.mark.slow
    def test_lq_with_l1_generators(self, lq_spec):
        """Test both gaps within 5% at h = 1/50, dt = 1/512 and 10^5 paths."""
        solution = backward_sweep_hierarchical(lq_spec, nodes_per_axis=301)
        report = cross_validate(lq_spec, solution, 100_000, 1.0 / 512, seed=3)

        for grid_value, gap in zip((report.grid_value_1, report.grid_value_2), report.gaps):
            assert gap <= 0.05 * max(abs(grid_value), 0.1)

    def test_initial_state_near_boundary(self):
        """Test that x0 within 10% of the box width of a face is rejected."""
        spec = build_problem(builtin_config("heat", initial_state=[3.8]))
        solution = backward_sweep_hierarchical(spec, nodes_per_axis=21)
        with pytest.raises(PreconditionError, match="boundary"):
            cross_validate(spec, solution, 256, 0.25, seed=0)

    def test_solution_from_other_problem(self, heat_spec, lq_spec):
        """Test that the solution must belong to the same problem."""
        solution = backward_sweep_hierarchical(heat_spec, nodes_per_axis=21)
        with pytest.raises(PreconditionError):
            cross_validate(lq_spec, solution, 256, 0.25, seed=0)

    def test_tabulated_policies(self, lq_spec):
        """Test that the solved tables become nearest-node feedback policies."""
        solution = backward_sweep_hierarchical(lq_spec, nodes_per_axis=21)
        leader, follower = policies_from_solution(lq_spec, solution)
        grid = solution.grid
        x = lq_spec.x0[None, :]
        node = int(grid.nearest_node(x)[0])

        assert leader.indices(0.0, x)[0] == solution.policy.leader[0, node]
        assert follower.indices(grid.times[-2], x)[0] == solution.policy.follower[-1, node]
        assert lq_spec.leader_controls.contains(leader(0.0, x)[0])


class TestLeaderDeviation:
    """Test cases for pointwise leader optimality."""

    def test_no_profitable_deviation(self, lq_spec):
        """Test that no leader control beats v* with the follower re-optimizing."""
        solution = backward_sweep_hierarchical(lq_spec, nodes_per_axis=21)
        grid = solution.grid
        for k in (0, grid.n_t - 1):
            for node in range(1, grid.n_nodes - 1, 4):
                gains = [leader_deviation_gain(lq_spec, solution, k, node, v_index)
                         for v_index in range(lq_spec.leader_controls.size)]

                assert min(gains) >= 0.0
                assert gains[solution.policy.leader[k, node]] == 0.0

    def test_time_index_range(self, lq_spec):
        """Test the step index check."""
        solution = backward_sweep_hierarchical(lq_spec, nodes_per_axis=11)
        with pytest.raises(PreconditionError):
            leader_deviation_gain(lq_spec, solution, solution.grid.n_t, 0, 0)
        assert np.isfinite(leader_deviation_gain(lq_spec, solution, 0, 5, 0))


class TestFollowerBestResponse:
    """Test cases for the follower's Monte-Carlo optimality."""

    @pytest.mark.slow
    def test_constant_deviations_do_not_help(self, lq_spec):
        """Test the follower's value under (v*, S(v*)) against every constant w."""
        solution = backward_sweep_hierarchical(lq_spec, nodes_per_axis=101)
        leader, follower = policies_from_solution(lq_spec, solution)
        best = evaluate_risk_value(lq_spec, leader, follower, Player.FOLLOWER, 20_000, 1.0 / 128, seed=4)
        tolerance = 0.05 * max(abs(best.y0), 0.1) + 3.0 * best.standard_error

        for w in lq_spec.follower_controls.points:
            deviation = ConstantPolicy(lq_spec.follower_controls, w)
            value = risk_value(lq_spec, leader, deviation, Player.FOLLOWER, 20_000, 1.0 / 128, seed=4)
            assert best.y0 <= value + tolerance
