"""
Sampled validation of the standing assumptions.

Checks the generator Lipschitz bound and g(t, 0) = 0, uniform ellipticity of
sigma sigma^T, Lipschitz continuity of the presets in x and the growth bounds
of the dynamics and costs. Failures are reported with witness points, never
raised.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np

from .errors import PreconditionError
from .generators import Generator
from .problem import Player, ProblemSpec


logger = logging.getLogger(__name__)


class CheckStatus(str, Enum):
    """Outcome of one assumption check."""
    PASS = "pass"
    WARN = "warn"
    FAIL = "fail"


@dataclass
class AssumptionCheck:
    """Result of one assumption check."""
    name: str
    status: CheckStatus
    message: str
    estimate: Optional[float] = None
    witness: Optional[Dict[str, Any]] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "status": self.status.value,
            "message": self.message,
            "estimate": self.estimate,
            "witness": self.witness,
            "details": self.details,
        }


@dataclass
class AssumptionReport:
    """Per-assumption pass/fail with witnesses and estimated constants."""
    checks: List[AssumptionCheck]
    samples: int
    seed: int

    @property
    def passed(self) -> bool:
        return all(check.status is not CheckStatus.FAIL for check in self.checks)

    @property
    def failures(self) -> List[AssumptionCheck]:
        return [check for check in self.checks if check.status is CheckStatus.FAIL]

    def check(self, name: str) -> AssumptionCheck:
        for item in self.checks:
            if item.name == name:
                return item
        raise KeyError(name)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "samples": self.samples,
            "seed": self.seed,
            "checks": [check.to_dict() for check in self.checks],
        }


def _point(t, x, v, w, z=None) -> Dict[str, Any]:
    point = {"t": float(t), "x": np.asarray(x).tolist(), "v": np.asarray(v).tolist(),
             "w": np.asarray(w).tolist()}
    if z is not None:
        point["z"] = np.asarray(z).tolist()
    return point


def _generator_checks(label: str, gen: Generator, s: Dict[str, np.ndarray],
                      tolerance: float) -> List[AssumptionCheck]:
    checks = []
    g1 = gen(s["t"], s["z"])
    g2 = gen(s["t"], s["z2"])
    dist = np.sum(np.abs(s["z"] - s["z2"]), axis=-1)
    ratio = np.abs(g1 - g2) / np.maximum(dist, 1e-300)
    k = int(np.argmax(ratio))
    witness = {"t": float(s["t"][k]), "z1": s["z"][k].tolist(), "z2": s["z2"][k].tolist()}
    declared = gen.lipschitz_constant
    if declared is None:
        checks.append(AssumptionCheck(
            name=f"lipschitz-z-{label}",
            status=CheckStatus.WARN,
            message=(f"{gen.preset.value} is not globally Lipschitz in z; "
                     "admitted on the bounded z-box only"),
            estimate=float(ratio[k]),
            witness=witness,
        ))
    else:
        ok = ratio[k] <= declared + tolerance
        checks.append(AssumptionCheck(
            name=f"lipschitz-z-{label}",
            status=CheckStatus.PASS if ok else CheckStatus.FAIL,
            message=f"sampled Lipschitz ratio {ratio[k]:.6g} vs declared {declared:.6g}",
            estimate=float(ratio[k]),
            witness=None if ok else witness,
            details={"declared": declared},
        ))

    at_zero = np.abs(gen(s["t"], np.zeros_like(s["z"])))
    k0 = int(np.argmax(at_zero))
    ok0 = at_zero[k0] == 0.0
    checks.append(AssumptionCheck(
        name=f"zero-at-origin-{label}",
        status=CheckStatus.PASS if ok0 else CheckStatus.FAIL,
        message=f"max |g(t,0)| = {at_zero[k0]:.6g}",
        estimate=float(at_zero[k0]),
        witness=None if ok0 else {"t": float(s["t"][k0])},
    ))
    return checks


def _ellipticity_check(spec: ProblemSpec, s: Dict[str, np.ndarray]) -> AssumptionCheck:
    a = spec.diffusion_covariance(s["t"], s["x"], s["v"], s["w"])
    eig = np.linalg.eigvalsh(a)[:, 0]
    k = int(np.argmin(eig))
    sampled_min, witness = float(eig[k]), _point(s["t"][k], s["x"][k], s["v"][k], s["w"][k])
    lattice_min, lattice_witness = spec.min_ellipticity()
    if lattice_min < sampled_min:
        sampled_min, witness = lattice_min, lattice_witness
    ok = sampled_min >= spec.ellipticity_floor
    return AssumptionCheck(
        name="ellipticity",
        status=CheckStatus.PASS if ok else CheckStatus.FAIL,
        message=(f"least eigenvalue of sigma sigma^T {sampled_min:.6g} "
                 f"{'>=' if ok else '<'} floor {spec.ellipticity_floor:.6g}"),
        estimate=sampled_min,
        witness=None if ok else witness,
    )


def _lipschitz_x_checks(spec: ProblemSpec, s: Dict[str, np.ndarray]) -> List[AssumptionCheck]:
    t, x, x2, v, w = s["t"], s["x"], s["x2"], s["v"], s["w"]
    dist = np.maximum(np.linalg.norm(x - x2, axis=-1), 1e-300)
    values = {
        "drift": lambda y: spec.drift(t, y, v, w),
        "diffusion": lambda y: spec.diffusion(t, y, v, w).reshape(y.shape[0], -1),
        "leader_cost": lambda y: spec.leader_cost(t, y, v)[:, None],
        "follower_cost": lambda y: spec.follower_cost(t, y, w)[:, None],
        "leader_terminal": lambda y: spec.leader_terminal(y)[:, None],
        "follower_terminal": lambda y: spec.follower_terminal(y)[:, None],
    }
    checks = []
    for name, fn in values.items():
        ratio = np.linalg.norm(fn(x) - fn(x2), axis=-1) / dist
        k = int(np.argmax(ratio))
        ok = bool(np.isfinite(ratio[k]))
        checks.append(AssumptionCheck(
            name=f"lipschitz-x-{name}",
            status=CheckStatus.PASS if ok else CheckStatus.FAIL,
            message=f"sampled Lipschitz constant in x on the domain box: {ratio[k]:.6g}",
            estimate=float(ratio[k]),
            witness=None if ok else _point(t[k], x[k], v[k], w[k]),
        ))
    return checks


def _growth_checks(spec: ProblemSpec, s: Dict[str, np.ndarray], p: float) -> List[AssumptionCheck]:
    t, x, v, w = s["t"], s["x"], s["v"], s["w"]
    dynamics = (np.linalg.norm(spec.drift(t, x, v, w), axis=-1)
                + np.linalg.norm(spec.diffusion(t, x, v, w).reshape(x.shape[0], -1), axis=-1))
    scale = (1.0 + np.linalg.norm(x, axis=-1) ** p + np.linalg.norm(v, axis=-1)
             + np.linalg.norm(w, axis=-1))
    checks = []
    for player in Player:
        cost = np.abs(spec.running_cost(player, t, x, v, w))
        terminal = np.abs(spec.terminal(player)(x))
        ratio = (dynamics + cost + terminal) / scale
        k = int(np.argmax(ratio))
        ok = bool(np.isfinite(ratio[k]))
        checks.append(AssumptionCheck(
            name=f"growth-{player.value}",
            status=CheckStatus.PASS if ok else CheckStatus.FAIL,
            message=f"sampled growth constant K = {ratio[k]:.6g} (p = {p:g})",
            estimate=float(ratio[k]),
            witness=None if ok else _point(t[k], x[k], v[k], w[k]),
            details={"exponent": p},
        ))
    return checks


def draw_samples(spec: ProblemSpec, samples: int, seed: int, z_bound: float) -> Dict[str, np.ndarray]:
    """Uniform samples of (t, x, v, w, z) plus a second (x, z) for ratio checks."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    lo = np.asarray(spec.domain_box.lower)
    hi = np.asarray(spec.domain_box.upper)
    d = spec.dim
    return {
        "t": rng.uniform(0.0, spec.horizon, samples),
        "x": rng.uniform(lo, hi, (samples, d)),
        "x2": rng.uniform(lo, hi, (samples, d)),
        "v": spec.leader_controls.points[rng.integers(0, spec.leader_controls.size, samples)],
        "w": spec.follower_controls.points[rng.integers(0, spec.follower_controls.size, samples)],
        "z": rng.uniform(-z_bound, z_bound, (samples, d)),
        "z2": rng.uniform(-z_bound, z_bound, (samples, d)),
    }


def validate_assumptions(spec: ProblemSpec, samples: int = 4096, seed: int = 42,
                         z_bound: float = 10.0, growth_exponent: float = 2.0,
                         tolerance: float = 1e-9) -> AssumptionReport:
    """Sample the standing assumptions; deterministic given ``seed``."""
    if samples < 1:
        raise PreconditionError("samples must be >= 1")
    s = draw_samples(spec, samples, seed, z_bound)
    checks: List[AssumptionCheck] = []
    checks.extend(_generator_checks("leader-generator", spec.leader_generator, s, tolerance))
    checks.extend(_generator_checks("follower-generator", spec.follower_generator, s, tolerance))
    checks.append(_ellipticity_check(spec, s))
    checks.extend(_lipschitz_x_checks(spec, s))
    checks.extend(_growth_checks(spec, s, growth_exponent))

    report = AssumptionReport(checks=checks, samples=samples, seed=seed)
    for check in checks:
        if check.status is CheckStatus.FAIL:
            logger.warning("Assumption check failed: %s - %s", check.name, check.message)
        elif check.status is CheckStatus.WARN:
            logger.warning("Assumption check flagged: %s - %s", check.name, check.message)
    logger.info("Assumption validation finished: passed=%s, samples=%d", report.passed, samples)
    return report


