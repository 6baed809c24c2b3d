"""
Problem-core Tests

Unit tests for problem construction, control sets, generators and the
sampled assumption checks.
"""

import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from hrc.core import (
    CheckStatus, ControlSet, Generator, GeneratorPreset, PreconditionError, ProblemConfigError,
    builtin_config, builtin_problem, build_problem, eval_generator, load_problem,
    validate_assumptions,
)
from hrc.core.assumptions import draw_samples
from hrc.core.catalog import builtin_names
from hrc.core.problem import ProblemSpec


PROBLEMS_DIR = Path(__file__).resolve().parents[1] / "problems"


def _identity_2d(floor):
    config = builtin_config("brownian", params={"dim": 2})
    config["ellipticity_floor"] = floor
    return config


class TestBuildProblem:
    """Test cases for building problem specs from records."""

    @pytest.fixture
    def config(self):
        """A valid d = 1 record with f = v + w and sigma = 1."""
        config = builtin_config("decoupled")
        config["diffusion"] = {"family": "constant-diffusion", "matrix": [[1.0]]}
        return config

    def test_control_discretization(self, config):
        """Test a 3-point interval discretization."""
        spec = build_problem(config)

        assert spec.horizon == 1.0
        assert spec.dim == 1
        np.testing.assert_array_equal(spec.leader_controls.points[:, 0], [-1.0, 0.0, 1.0])

    def test_negative_horizon(self, config):
        """Test the horizon sign check."""
        config["horizon"] = -1
        with pytest.raises(ProblemConfigError) as excinfo:
            build_problem(config)
        assert "horizon must be positive" in excinfo.value.issues

    def test_errors_are_collected(self, config):
        """Test that independent field errors are reported together."""
        config["horizon"] = -1
        config["initial_state"] = [10.0]
        config["leader_generator"] = {"preset": "cubic", "kappa": 1.0}
        with pytest.raises(ProblemConfigError) as excinfo:
            build_problem(config)
        issues = excinfo.value.issues
        assert "horizon must be positive" in issues
        assert any("initial state outside domain box" in issue for issue in issues)
        assert any("unknown preset id 'cubic'" in issue for issue in issues)

    def test_unknown_and_missing_keys(self, config):
        """Test that unknown keys are an error, as are missing ones."""
        config["solver"] = "fast"
        del config["horizon"]
        with pytest.raises(ProblemConfigError) as excinfo:
            build_problem(config)
        assert "unknown key 'solver'" in excinfo.value.issues
        assert "missing key 'horizon'" in excinfo.value.issues

    def test_unknown_preset_family(self, config):
        """Test rejection of a family outside the catalog."""
        config["drift"] = {"family": "neural-drift"}
        with pytest.raises(ProblemConfigError, match="unknown preset id 'neural-drift'"):
            build_problem(config)

    def test_shape_mismatch(self, config):
        """Test coefficient shape checks against dim and control dimensions."""
        config["drift"] = {"family": "affine-drift", "leader": [[1.0, 2.0]]}
        with pytest.raises(ProblemConfigError, match="shape"):
            build_problem(config)

    def test_empty_control_set(self, config):
        """Test that a control set with no points is rejected."""
        config["follower_controls"] = {"lower": [-1.0], "upper": [1.0], "points": [0]}
        with pytest.raises(ProblemConfigError, match="empty control set"):
            build_problem(config)

    def test_identity_diffusion_passes_validation(self):
        """Test that sigma = I with floor 0.5 validates."""
        spec = build_problem(_identity_2d(0.5))
        report = validate_assumptions(spec, samples=256, seed=1)

        assert report.check("ellipticity").status is CheckStatus.PASS
        assert report.check("ellipticity").estimate == pytest.approx(1.0)

    def test_strict_ellipticity(self):
        """Test that the floor is enforced at build time on request."""
        spec = build_problem(_identity_2d(2.0))
        assert spec.ellipticity_floor == 2.0

        with pytest.raises(ProblemConfigError, match="ellipticity_floor"):
            build_problem(_identity_2d(2.0), strict_ellipticity=True)

    def test_pure_function_of_config(self, config):
        """Test that identical records yield identical specs."""
        first = build_problem(config)
        second = build_problem(json.loads(json.dumps(config)))

        assert first.digest == second.digest
        assert first.to_dict() == second.to_dict()

    def test_round_trip_through_record(self, config):
        """Test that a spec's canonical record rebuilds the same spec."""
        spec = build_problem(config)
        assert build_problem(spec.to_dict()).digest == spec.digest

    def test_load_problem_reports_position(self, tmp_path):
        """Test JSON syntax errors carry line and column."""
        path = tmp_path / "broken.json"
        path.write_text('{\n  "horizon": 1.0,\n  "dim": \n}\n')
        with pytest.raises(ProblemConfigError, match="line 4"):
            load_problem(path)

    def test_load_problem_missing_file(self, tmp_path):
        """Test that an unreadable file is a configuration error."""
        with pytest.raises(ProblemConfigError, match="cannot read"):
            load_problem(tmp_path / "absent.json")

    @pytest.mark.parametrize("name", builtin_names())
    def test_builtins_build(self, name):
        """Test that every built-in fixture is a valid problem."""
        spec = builtin_problem(name)
        assert spec.domain_box.contains(spec.x0)


class TestControlSet:
    """Test cases for finite control sets."""

    def test_lexicographic_order(self):
        """Test 2-d points enumerate with the last coordinate fastest."""
        controls = ControlSet(lower=(0.0, 0.0), upper=(1.0, 1.0), points_per_coordinate=(2, 2))

        np.testing.assert_array_equal(controls.points, [[0, 0], [0, 1], [1, 0], [1, 1]])
        assert len(controls) == 4

    def test_singleton_midpoint(self):
        """Test that one point per coordinate sits at the interval midpoint."""
        controls = ControlSet(lower=(-1.0,), upper=(3.0,), points_per_coordinate=(1,))
        np.testing.assert_array_equal(controls.points, [[1.0]])

    def test_index_of(self):
        """Test point lookup and membership."""
        controls = ControlSet(lower=(-1.0,), upper=(1.0,), points_per_coordinate=(5,))

        assert controls.index_of([0.5]) == 3
        assert controls.contains([-0.5])
        assert not controls.contains([0.25])
        with pytest.raises(KeyError):
            controls.index_of([0.25])

    def test_duplicate_points_rejected(self):
        """Test that several points on a degenerate interval are rejected."""
        with pytest.raises(ProblemConfigError, match="duplicate"):
            ControlSet(lower=(1.0,), upper=(1.0,), points_per_coordinate=(3,))

    @pytest.mark.parametrize("points", [[2.9], [2.0], [True], ["3"]])
    def test_point_counts_must_be_integers(self, points):
        """Test that fractional, float, bool and string counts are rejected."""
        with pytest.raises(ProblemConfigError, match="integers"):
            ControlSet.from_dict({"lower": [-1.0], "upper": [1.0], "points": points})

    def test_fractional_count_in_problem_file(self):
        """Test the count check surfaces through build_problem."""
        config = builtin_config("lq-decoupled")
        config["leader_controls"] = {"lower": [-1.0], "upper": [1.0], "points": [2.9]}
        with pytest.raises(ProblemConfigError) as excinfo:
            build_problem(config)
        assert any("integers" in issue for issue in excinfo.value.issues)


class TestGenerators:
    """Test cases for generator evaluation."""

    def test_zero(self):
        """Test the zero generator."""
        assert eval_generator(Generator(), 0.3, [3.0, -4.0]) == 0.0

    def test_scaled_l1(self):
        """Test 0.5 * (3 + 4)."""
        gen = Generator(GeneratorPreset.SCALED_L1, 0.5)
        assert eval_generator(gen, 0.0, [3.0, 4.0]) == pytest.approx(3.5)

    def test_scaled_quadratic(self):
        """Test (9 + 16) / 2."""
        gen = Generator(GeneratorPreset.SCALED_QUADRATIC, 1.0)
        assert eval_generator(gen, 0.0, [3.0, 4.0]) == pytest.approx(12.5)

    def test_dimension_mismatch(self):
        """Test that z must match the state dimension."""
        with pytest.raises(PreconditionError):
            eval_generator(Generator(), 0.0, [1.0, 2.0], dim=1)

    def test_negative_kappa(self):
        """Test that kappa must be nonnegative."""
        with pytest.raises(ProblemConfigError):
            Generator.from_dict({"preset": "scaled-l1", "kappa": -0.1})

    def test_properties_on_samples(self):
        """Test g(t, 0) = 0, the l1 Lipschitz bound, homogeneity and convexity."""
        rng = np.random.default_rng(3)
        z1 = rng.uniform(-10, 10, size=(1000, 2))
        z2 = rng.uniform(-10, 10, size=(1000, 2))
        theta = rng.uniform(0, 1, size=(1000, 1))
        l1 = Generator(GeneratorPreset.SCALED_L1, 0.5)
        quadratic = Generator(GeneratorPreset.SCALED_QUADRATIC, 1.0)

        for gen in (Generator(), l1, quadratic):
            assert np.all(gen(0.0, np.zeros((5, 2))) == 0.0)
            mixed = gen(0.0, theta * z1 + (1 - theta) * z2)
            bound = theta[:, 0] * gen(0.0, z1) + (1 - theta[:, 0]) * gen(0.0, z2)
            assert np.all(mixed <= bound + 1e-9)

        gap = np.abs(l1(0.0, z1) - l1(0.0, z2))
        assert np.all(gap <= 0.5 * np.sum(np.abs(z1 - z2), axis=1) + 1e-12)
        for lam in (0.5, 2.0, 7.0):
            np.testing.assert_allclose(l1(0.0, lam * z1), lam * l1(0.0, z1), rtol=1e-14)
        assert l1.is_positively_homogeneous
        assert not quadratic.is_positively_homogeneous
        assert quadratic.lipschitz_constant is None


class TestValidateAssumptions:
    """Test cases for the sampled assumption report."""

    def test_zero_generator(self, heat_spec):
        """Test g(t, 0) = 0 for the zero generator."""
        report = validate_assumptions(heat_spec, samples=512, seed=0)
        check = report.check("zero-at-origin-leader-generator")

        assert check.status is CheckStatus.PASS
        assert check.estimate == 0.0
        assert report.passed

    def test_l1_lipschitz_estimate(self):
        """Test the sampled Lipschitz estimate of 0.5 * l1."""
        spec = builtin_problem("lq-decoupled", params={"kappa": 0.5})
        report = validate_assumptions(spec, samples=2048, seed=0)
        check = report.check("lipschitz-z-leader-generator")

        assert check.status is CheckStatus.PASS
        assert check.estimate <= 0.5 + 1e-9

    def test_quadratic_generator_is_flagged(self, heat_spec):
        """Test that the quadratic generator is a warning, not a failure."""
        spec = replace(
            heat_spec,
            follower_generator=Generator(GeneratorPreset.SCALED_QUADRATIC, 1.0))
        report = validate_assumptions(spec, samples=256, seed=0)

        assert report.check("lipschitz-z-follower-generator").status is CheckStatus.WARN
        assert report.passed

    def test_growth_reported_per_player(self, heat_spec):
        """Test one growth check per player with the requested exponent."""
        report = validate_assumptions(heat_spec, samples=256, seed=0, growth_exponent=3.0)

        for player in ("leader", "follower"):
            check = report.check(f"growth-{player}")
            assert check.status is CheckStatus.PASS
            assert np.isfinite(check.estimate) and check.estimate >= 0.0
            assert check.details["exponent"] == 3.0

    def test_coefficients_evaluated_at_sampled_times(self, monkeypatch):
        """Test that sigma is evaluated at the sampled t reported in the witness."""
        spec = build_problem(_identity_2d(2.0))
        seen = []
        original = ProblemSpec.diffusion_covariance

        def recording(self, t, x, v, w):
            seen.append(np.array(t, dtype=float, copy=True))
            return original(self, t, x, v, w)

        monkeypatch.setattr(ProblemSpec, "diffusion_covariance", recording)
        report = validate_assumptions(spec, samples=64, seed=3)
        times = draw_samples(spec, 64, 3, 10.0)["t"]

        np.testing.assert_array_equal(seen[0], times)
        assert report.check("ellipticity").witness["t"] in times.tolist()

    def test_ellipticity_failure_has_witness(self):
        """Test sigma = diag(1, 1) against floor 2."""
        spec = build_problem(_identity_2d(2.0))
        report = validate_assumptions(spec, samples=256, seed=0)
        check = report.check("ellipticity")

        assert not report.passed
        assert check.status is CheckStatus.FAIL
        assert check.witness is not None
        assert check.estimate == pytest.approx(1.0)

    def test_deterministic_given_seed(self, lq_spec):
        """Test that the report is a function of the seed."""
        first = validate_assumptions(lq_spec, samples=300, seed=5).to_dict()
        second = validate_assumptions(lq_spec, samples=300, seed=5).to_dict()
        assert first == second

    def test_samples_precondition(self, lq_spec):
        """Test that at least one sample is required."""
        with pytest.raises(PreconditionError):
            validate_assumptions(lq_spec, samples=0)


class TestShippedProblems:
    """Test cases for the example problem files."""

    def test_lq_file_matches_builtin(self):
        """Test problems/lq.json is the lq-decoupled fixture."""
        assert load_problem(PROBLEMS_DIR / "lq.json").digest == builtin_problem("lq-decoupled").digest

    def test_two_dimensional_file(self):
        """Test the coupled 2D example passes its assumption checks."""
        spec = load_problem(PROBLEMS_DIR / "coupled_2d.json")
        assert spec.dim == 2
        assert validate_assumptions(spec, samples=512, seed=0).passed

    def test_invalid_ellipticity_file(self):
        """Test the weak-diffusion example builds but fails validation."""
        spec = load_problem(PROBLEMS_DIR / "invalid_ellipticity.json")
        report = validate_assumptions(spec, samples=256, seed=0)

        assert report.check("ellipticity").status is CheckStatus.FAIL
        with pytest.raises(ProblemConfigError):
            load_problem(PROBLEMS_DIR / "invalid_ellipticity.json", strict_ellipticity=True)
