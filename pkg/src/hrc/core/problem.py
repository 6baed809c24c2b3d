"""
Problem instances.

A ``ProblemSpec`` houses the dynamics f and sigma, the running costs c1/c2,
the terminal costs Psi1/Psi2, the generators g1/g2, the finite control sets
V/W, the truncated computational box and the initial state. Instances are
built from declarative JSON problem files by ``build_problem``.
"""

import hashlib
import json
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np

from .controls import ControlSet
from .errors import ProblemConfigError
from .generators import Generator
from .presets import (
    DiffusionPreset, AffineDrift, FunctionPreset, PresetRole, QuadraticCost,
    TerminalPreset, control_size_for, preset_from_dict,
)


logger = logging.getLogger(__name__)


PROBLEM_KEYS = (
    "horizon", "dim", "drift", "diffusion", "leader_cost", "follower_cost",
    "leader_terminal", "follower_terminal", "leader_generator", "follower_generator",
    "leader_controls", "follower_controls", "domain_box", "ellipticity_floor",
    "initial_state",
)

LATTICE_POINTS_PER_AXIS = 5
LATTICE_TIMES = 3


class Player(str, Enum):
    """The two decision groups."""
    LEADER = "leader"
    FOLLOWER = "follower"


@dataclass(frozen=True)
class Box:
    """Axis-aligned box in R^d."""
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def width(self) -> np.ndarray:
        return np.asarray(self.upper) - np.asarray(self.lower)

    @property
    def volume(self) -> float:
        return float(np.prod(self.width))

    def contains(self, x, margin: float = 0.0) -> bool:
        """True if x lies in the box shrunk by ``margin`` times its width."""
        x = np.asarray(x, dtype=float)
        lo = np.asarray(self.lower) + margin * self.width
        hi = np.asarray(self.upper) - margin * self.width
        return bool(np.all(x >= lo) and np.all(x <= hi))

    def to_dict(self) -> Dict[str, Any]:
        return {"lower": list(self.lower), "upper": list(self.upper)}


@dataclass(frozen=True)
class ProblemSpec:
    """Full parametric description of a hierarchical risk-averse control problem."""
    horizon: float
    dim: int
    drift: AffineDrift
    diffusion: DiffusionPreset
    leader_cost: QuadraticCost
    follower_cost: QuadraticCost
    leader_terminal: TerminalPreset
    follower_terminal: TerminalPreset
    leader_generator: Generator
    follower_generator: Generator
    leader_controls: ControlSet
    follower_controls: ControlSet
    domain_box: Box
    ellipticity_floor: float
    initial_state: Tuple[float, ...]

    def cost(self, player: Player) -> QuadraticCost:
        return self.leader_cost if Player(player) is Player.LEADER else self.follower_cost

    def terminal(self, player: Player) -> TerminalPreset:
        return self.leader_terminal if Player(player) is Player.LEADER else self.follower_terminal

    def generator(self, player: Player) -> Generator:
        return self.leader_generator if Player(player) is Player.LEADER else self.follower_generator

    def controls(self, player: Player) -> ControlSet:
        return self.leader_controls if Player(player) is Player.LEADER else self.follower_controls

    @property
    def x0(self) -> np.ndarray:
        return np.asarray(self.initial_state, dtype=float)

    def running_cost(self, player: Player, t: float, x: np.ndarray,
                     v: np.ndarray, w: np.ndarray) -> np.ndarray:
        """c1(t, x, v) for the leader, c2(t, x, w) for the follower."""
        return self.cost(player)(t, x, v if Player(player) is Player.LEADER else w)

    def to_dict(self) -> Dict[str, Any]:
        """Canonical problem-file record of this spec."""
        return {
            "horizon": self.horizon,
            "dim": self.dim,
            "drift": self.drift.to_dict(),
            "diffusion": self.diffusion.to_dict(),
            "leader_cost": self.leader_cost.to_dict(),
            "follower_cost": self.follower_cost.to_dict(),
            "leader_terminal": self.leader_terminal.to_dict(),
            "follower_terminal": self.follower_terminal.to_dict(),
            "leader_generator": self.leader_generator.to_dict(),
            "follower_generator": self.follower_generator.to_dict(),
            "leader_controls": self.leader_controls.to_dict(),
            "follower_controls": self.follower_controls.to_dict(),
            "domain_box": self.domain_box.to_dict(),
            "ellipticity_floor": self.ellipticity_floor,
            "initial_state": list(self.initial_state),
        }

    @property
    def digest(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def lattice(self) -> Dict[str, np.ndarray]:
        """Validation lattice: box grid x times x all (v, w) pairs, flattened."""
        axes = [np.linspace(lo, hi, LATTICE_POINTS_PER_AXIS)
                for lo, hi in zip(self.domain_box.lower, self.domain_box.upper)]
        xs = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        ts = np.linspace(0.0, self.horizon, LATTICE_TIMES)
        nv, nw, nx = self.leader_controls.size, self.follower_controls.size, xs.shape[0]
        ti, xi, vi, wi = np.meshgrid(np.arange(ts.size), np.arange(nx), np.arange(nv),
                                     np.arange(nw), indexing="ij")
        return {
            "t": ts[ti.ravel()],
            "x": xs[xi.ravel()],
            "v": self.leader_controls.points[vi.ravel()],
            "w": self.follower_controls.points[wi.ravel()],
        }

    def diffusion_covariance(self, t: float, x: np.ndarray, v: np.ndarray, w: np.ndarray) -> np.ndarray:
        """a = sigma sigma^T, accumulated entry by entry."""
        sigma = self.diffusion(t, x, v, w)
        d = self.dim
        a = np.zeros(sigma.shape)
        for i in range(d):
            for j in range(d):
                acc = np.zeros(sigma.shape[0])
                for k in range(d):
                    acc = acc + sigma[:, i, k] * sigma[:, j, k]
                a[:, i, j] = acc
        return a

    def min_ellipticity(self) -> Tuple[float, Dict[str, Any]]:
        """Least eigenvalue of sigma sigma^T over the lattice and its witness."""
        lat = self.lattice()
        best, witness = np.inf, {}
        for t in np.unique(lat["t"]):
            mask = lat["t"] == t
            a = self.diffusion_covariance(float(t), lat["x"][mask], lat["v"][mask], lat["w"][mask])
            eig = np.linalg.eigvalsh(a)[:, 0]
            k = int(np.argmin(eig))
            if eig[k] < best:
                best = float(eig[k])
                witness = {
                    "t": float(t),
                    "x": lat["x"][mask][k].tolist(),
                    "v": lat["v"][mask][k].tolist(),
                    "w": lat["w"][mask][k].tolist(),
                }
        return best, witness


def _number(data: Dict[str, Any], key: str, issues: List[str]) -> float:
    value = data.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not np.isfinite(value):
        issues.append(f"{key}: must be a finite number")
        return float("nan")
    return float(value)


def build_problem(config: Dict[str, Any], strict_ellipticity: bool = False) -> ProblemSpec:
    """
    Build a ProblemSpec from a problem-file record.

    All field errors are collected and raised together as a
    ``ProblemConfigError``. An ellipticity floor above the least eigenvalue
    of sigma sigma^T on the validation lattice is logged as a warning (a
    degenerate-diffusion test override) unless ``strict_ellipticity`` is set.
    """
    if not isinstance(config, dict):
        raise ProblemConfigError(["problem must be a JSON object"])
    issues: List[str] = []
    issues.extend(f"unknown key '{key}'" for key in sorted(set(config) - set(PROBLEM_KEYS)))
    missing = [key for key in PROBLEM_KEYS if key not in config]
    issues.extend(f"missing key '{key}'" for key in missing)
    if issues:
        raise ProblemConfigError(issues)

    horizon = _number(config, "horizon", issues)
    if np.isfinite(horizon) and horizon <= 0:
        issues.append("horizon must be positive")
    dim = config["dim"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim not in (1, 2):
        issues.append("dim must be 1 or 2")
        raise ProblemConfigError(issues)

    floor = _number(config, "ellipticity_floor", issues)
    if np.isfinite(floor) and floor <= 0:
        issues.append("ellipticity_floor must be positive")

    def collect(builder, label):
        try:
            return builder()
        except ProblemConfigError as e:
            issues.extend(f"{label}: {issue}" for issue in e.issues)
            return None

    leader_controls = collect(lambda: ControlSet.from_dict(config["leader_controls"]), "leader_controls")
    follower_controls = collect(lambda: ControlSet.from_dict(config["follower_controls"]), "follower_controls")
    leader_generator = collect(lambda: Generator.from_dict(config["leader_generator"]), "leader_generator")
    follower_generator = collect(lambda: Generator.from_dict(config["follower_generator"]), "follower_generator")

    box = None
    box_raw = config["domain_box"]
    if not isinstance(box_raw, dict) or set(box_raw) != {"lower", "upper"}:
        issues.append("domain_box: expected exactly the keys {lower, upper}")
    else:
        try:
            box = Box(lower=tuple(float(x) for x in box_raw["lower"]),
                      upper=tuple(float(x) for x in box_raw["upper"]))
        except (TypeError, ValueError):
            issues.append("domain_box: bounds must be numeric lists")
        if box is not None:
            if box.dim != dim or len(box.upper) != dim:
                issues.append(f"domain_box: bounds must have length {dim}")
                box = None
            elif not np.all(box.width > 0):
                issues.append("domain_box: box must have positive volume")

    x0 = None
    try:
        x0 = tuple(float(x) for x in config["initial_state"])
        if len(x0) != dim:
            issues.append(f"initial_state: expected length {dim}, got {len(x0)}")
            x0 = None
    except (TypeError, ValueError):
        issues.append("initial_state: must be a numeric list")
    if x0 is not None and box is not None and not box.contains(x0):
        issues.append("initial_state: initial state outside domain box")

    presets: Dict[PresetRole, FunctionPreset] = {}
    if leader_controls is not None and follower_controls is not None:
        mv, mw = leader_controls.dim, follower_controls.dim
        for role in PresetRole:
            sizes = {"d": dim, "mv": mv, "mw": mw}
            m = control_size_for(role, mv, mw)
            if m is not None:
                sizes["m"] = m
            preset = collect(lambda: preset_from_dict(config[role.value], role, sizes), "preset")
            if preset is not None:
                presets[role] = preset

    if issues:
        raise ProblemConfigError(issues)

    spec = ProblemSpec(
        horizon=horizon,
        dim=dim,
        drift=presets[PresetRole.DRIFT],
        diffusion=presets[PresetRole.DIFFUSION],
        leader_cost=presets[PresetRole.LEADER_COST],
        follower_cost=presets[PresetRole.FOLLOWER_COST],
        leader_terminal=presets[PresetRole.LEADER_TERMINAL],
        follower_terminal=presets[PresetRole.FOLLOWER_TERMINAL],
        leader_generator=leader_generator,
        follower_generator=follower_generator,
        leader_controls=leader_controls,
        follower_controls=follower_controls,
        domain_box=box,
        ellipticity_floor=floor,
        initial_state=x0,
    )

    min_eig, witness = spec.min_ellipticity()
    if min_eig < floor:
        message = (f"least eigenvalue of sigma sigma^T is {min_eig:.6g} < ellipticity_floor "
                   f"{floor:.6g} at {witness}")
        if strict_ellipticity:
            raise ProblemConfigError([f"diffusion: {message}"])
        logger.warning("Ellipticity floor violated (test override): %s", message)
    return spec


def load_problem(path: Union[str, Path], strict_ellipticity: bool = False) -> ProblemSpec:
    """Parse a JSON problem file and build its ProblemSpec."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ProblemConfigError([f"cannot read problem file {path}: {e}"])
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProblemConfigError([f"{path}: line {e.lineno}, column {e.colno}: {e.msg}"])
    return build_problem(data, strict_ellipticity=strict_ellipticity)
