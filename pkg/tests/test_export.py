"""
Export Tests

Unit tests for the CSV tables, JSON reports and the run manifest.
"""

import hashlib
import json

import numpy as np
import pandas as pd
import pytest

from hrc.bsde import solve_bsde
from hrc.core import Generator, Player
from hrc.export import (
    RunManifest, bsde_frame, fields_frame, paths_frame, sha256_file, to_json, write_fields_csv,
    write_paths_csv,
)
from hrc.hjb import LatticeGrid, backward_sweep_hierarchical
from hrc.sim import brownian_only


@pytest.fixture
def small_bundle():
    return brownian_only(1, 1.0, 0.25, 40, seed=3)


class TestFrames:
    """Test cases for the tabular layouts."""

    def test_paths_frame(self, small_bundle):
        """Test one row per path and step, controls blank at the final step."""
        frame = paths_frame(small_bundle)

        assert list(frame.columns) == ["path", "step", "t", "x_1", "v_1", "w_1"]
        assert len(frame) == 40 * 5
        np.testing.assert_array_equal(frame["x_1"].to_numpy().reshape(40, 5),
                                      small_bundle.states[:, :, 0])
        assert frame.loc[frame["step"] == 4, "v_1"].isna().all()
        assert (frame.loc[frame["step"] < 4, "w_1"] == 0.0).all()

    def test_bsde_frame(self, small_bundle):
        """Test y and z columns of a solved BSDE."""
        solution = solve_bsde(small_bundle, Generator(), small_bundle.terminal_states[:, 0])
        frame = bsde_frame(small_bundle, solution)

        assert list(frame.columns) == ["path", "step", "t", "y", "z_1"]
        np.testing.assert_array_equal(frame["y"].to_numpy().reshape(40, 5), solution.y)
        assert frame.loc[frame["step"] == 4, "z_1"].isna().all()

    def test_fields_frame(self, decoupled_spec):
        """Test one row per time level and node."""
        grid = LatticeGrid(decoupled_spec, 5, 2)
        solution = backward_sweep_hierarchical(decoupled_spec, grid)
        frame = fields_frame(solution)

        assert len(frame) == 3 * 5
        assert list(frame["k"].unique()) == [0, 1, 2]
        np.testing.assert_array_equal(frame["phi2"].to_numpy().reshape(3, 5),
                                      solution.follower.values)
        assert frame.loc[frame["k"] == 2, "w_star_1"].isna().all()


class TestWriters:
    """Test cases for files on disk."""

    def test_csv_floats_round_trip(self, small_bundle, tmp_path):
        """Test that 17 significant digits read back exactly."""
        path = write_paths_csv(small_bundle, tmp_path / "paths.csv")
        frame = pd.read_csv(path, float_precision="round_trip")

        np.testing.assert_array_equal(frame["x_1"].to_numpy().reshape(40, 5),
                                      small_bundle.states[:, :, 0])

    def test_identical_runs_identical_bytes(self, decoupled_spec, tmp_path):
        """Test that rewriting the same solution gives the same file."""
        solution = backward_sweep_hierarchical(decoupled_spec, nodes_per_axis=11)
        first = write_fields_csv(solution, tmp_path / "a.csv")
        second = write_fields_csv(solution, tmp_path / "b.csv")

        assert first.read_bytes() == second.read_bytes()
        assert sha256_file(first) == hashlib.sha256(first.read_bytes()).hexdigest()

    def test_to_json_handles_numpy(self):
        """Test numpy scalars, arrays and enums in reports."""
        data = json.loads(to_json({"y0": np.float64(0.5), "n": np.int64(3),
                                   "v": np.arange(2.0), "player": Player.LEADER}))
        assert data == {"y0": 0.5, "n": 3, "v": [0.0, 1.0], "player": "leader"}

    def test_manifest(self, tmp_path):
        """Test artifact digests and timing in manifest.json."""
        artifact = tmp_path / "report.json"
        artifact.write_text("{}\n")
        manifest = RunManifest(command="solve", settings={"grid": {"nodes_per_axis": 11}}, seeds=[42])
        digest = manifest.add_artifact("report", artifact)
        data = json.loads(manifest.write(tmp_path, 1.25).read_text())

        assert data["tool"] == "hrc"
        assert data["artifacts"]["report"] == {"path": "report.json", "sha256": digest}
        assert data["wall_clock_seconds"] == 1.25
        assert data["finished"] is not None
        assert data["seeds"] == [42]
