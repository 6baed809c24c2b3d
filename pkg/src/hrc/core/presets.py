"""
Parametric function presets for the drift, diffusion, running costs and
terminal costs.

All presets are evaluated on batches of points. Matrix-vector products are
written as explicit accumulation loops over the (small) coordinate axes so a
batch of n points and n single-point calls produce bit-identical results.
"""

from abc import ABC, abstractmethod
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .errors import ProblemConfigError


class PresetFamily(str, Enum):
    """Preset family ids accepted in problem files."""
    AFFINE_DRIFT = "affine-drift"
    CONSTANT_DIFFUSION = "constant-diffusion"
    AFFINE_DIFFUSION = "affine-diffusion"
    QUADRATIC_COST = "quadratic-cost"
    LINEAR_TERMINAL = "linear-terminal"
    QUADRATIC_TERMINAL = "quadratic-terminal"


class PresetRole(str, Enum):
    """Slot of the problem a preset fills."""
    DRIFT = "drift"
    DIFFUSION = "diffusion"
    LEADER_COST = "leader_cost"
    FOLLOWER_COST = "follower_cost"
    LEADER_TERMINAL = "leader_terminal"
    FOLLOWER_TERMINAL = "follower_terminal"


ROLE_FAMILIES = {
    PresetRole.DRIFT: {PresetFamily.AFFINE_DRIFT},
    PresetRole.DIFFUSION: {PresetFamily.CONSTANT_DIFFUSION, PresetFamily.AFFINE_DIFFUSION},
    PresetRole.LEADER_COST: {PresetFamily.QUADRATIC_COST},
    PresetRole.FOLLOWER_COST: {PresetFamily.QUADRATIC_COST},
    PresetRole.LEADER_TERMINAL: {PresetFamily.LINEAR_TERMINAL, PresetFamily.QUADRATIC_TERMINAL},
    PresetRole.FOLLOWER_TERMINAL: {PresetFamily.LINEAR_TERMINAL, PresetFamily.QUADRATIC_TERMINAL},
}


def _matvec(matrix: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Row-wise ``matrix @ x_k`` for a batch x of shape [n, m]."""
    rows, cols = matrix.shape
    out = np.zeros((x.shape[0], rows))
    for i in range(rows):
        acc = np.zeros(x.shape[0])
        for j in range(cols):
            acc = acc + matrix[i, j] * x[:, j]
        out[:, i] = acc
    return out


def _quadratic_form(matrix: np.ndarray, x: np.ndarray) -> np.ndarray:
    acc = np.zeros(x.shape[0])
    m = matrix.shape[0]
    for i in range(m):
        for j in range(m):
            acc = acc + matrix[i, j] * x[:, i] * x[:, j]
    return acc


def _dot(weights: np.ndarray, x: np.ndarray) -> np.ndarray:
    acc = np.zeros(x.shape[0])
    for i in range(weights.shape[0]):
        acc = acc + weights[i] * x[:, i]
    return acc


class FunctionPreset(ABC):
    """A member of the closed parametric catalog."""

    family: PresetFamily
    # coefficient name -> (shape template, required)
    coefficient_shapes: Dict[str, Tuple[Tuple[str, ...], bool]] = {}

    def __init__(self, coefficients: Dict[str, np.ndarray]):
        self.coefficients = coefficients

    @classmethod
    def build(cls, raw: Dict[str, Any], sizes: Dict[str, int]) -> "FunctionPreset":
        """Parse and shape-check coefficients; ``sizes`` maps d/mv/mw/m to ints."""
        issues: List[str] = []
        unknown = sorted(set(raw) - set(cls.coefficient_shapes))
        issues.extend(f"unknown coefficient '{key}' for family {cls.family.value}" for key in unknown)
        coefficients: Dict[str, np.ndarray] = {}
        for name, (template, required) in cls.coefficient_shapes.items():
            shape = tuple(sizes[axis] if axis in sizes else int(axis) for axis in template)
            if name not in raw:
                if required:
                    issues.append(f"missing coefficient '{name}'")
                coefficients[name] = np.zeros(shape)
                continue
            try:
                value = np.asarray(raw[name], dtype=float)
            except (TypeError, ValueError):
                issues.append(f"coefficient '{name}' is not numeric")
                continue
            if value.shape != shape:
                issues.append(f"coefficient '{name}' has shape {value.shape}, expected {shape}")
                continue
            if not np.all(np.isfinite(value)):
                issues.append(f"coefficient '{name}' has non-finite entries")
                continue
            value.setflags(write=False)
            coefficients[name] = value
        if issues:
            raise ProblemConfigError(issues)
        return cls(coefficients)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"family": self.family.value}
        for name in self.coefficient_shapes:
            data[name] = self.coefficients[name].tolist()
        return data

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.family.value})"


class AffineDrift(FunctionPreset):
    """f(t, x, (v, w)) = A x + B v + C w + b."""
    family = PresetFamily.AFFINE_DRIFT
    coefficient_shapes = {
        "state": (("d", "d"), False),
        "leader": (("d", "mv"), False),
        "follower": (("d", "mw"), False),
        "offset": (("d",), False),
    }

    def __call__(self, t: float, x: np.ndarray, v: np.ndarray, w: np.ndarray) -> np.ndarray:
        c = self.coefficients
        out = _matvec(c["state"], x) + _matvec(c["leader"], v)
        out = out + _matvec(c["follower"], w)
        return out + c["offset"]


class DiffusionPreset(FunctionPreset):
    """Common interface of the diffusion presets, returns [n, d, d]."""

    @abstractmethod
    def __call__(self, t: float, x: np.ndarray, v: np.ndarray, w: np.ndarray) -> np.ndarray:
        ...


class ConstantDiffusion(DiffusionPreset):
    """sigma(t, x, (v, w)) = S."""
    family = PresetFamily.CONSTANT_DIFFUSION
    coefficient_shapes = {"matrix": (("d", "d"), True)}

    def __call__(self, t: float, x: np.ndarray, v: np.ndarray, w: np.ndarray) -> np.ndarray:
        matrix = self.coefficients["matrix"]
        return np.broadcast_to(matrix, (x.shape[0],) + matrix.shape).copy()


class AffineDiffusion(DiffusionPreset):
    """sigma(t, x, (v, w)) = S0 + sum_j v_j Sv_j + sum_j w_j Sw_j."""
    family = PresetFamily.AFFINE_DIFFUSION
    coefficient_shapes = {
        "matrix": (("d", "d"), True),
        "leader": (("mv", "d", "d"), False),
        "follower": (("mw", "d", "d"), False),
    }

    def __call__(self, t: float, x: np.ndarray, v: np.ndarray, w: np.ndarray) -> np.ndarray:
        c = self.coefficients
        out = np.broadcast_to(c["matrix"], (x.shape[0],) + c["matrix"].shape).copy()
        for j in range(c["leader"].shape[0]):
            out = out + v[:, j, None, None] * c["leader"][j]
        for j in range(c["follower"].shape[0]):
            out = out + w[:, j, None, None] * c["follower"][j]
        return out


class QuadraticCost(FunctionPreset):
    """c(t, x, u) = x'Qx + u'Ru + q.x + r.u + k."""
    family = PresetFamily.QUADRATIC_COST
    coefficient_shapes = {
        "state": (("d", "d"), False),
        "control": (("m", "m"), False),
        "state_linear": (("d",), False),
        "control_linear": (("m",), False),
        "constant": ((), False),
    }

    def __call__(self, t: float, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        c = self.coefficients
        out = _quadratic_form(c["state"], x) + _quadratic_form(c["control"], u)
        out = out + _dot(c["state_linear"], x)
        out = out + _dot(c["control_linear"], u)
        return out + float(c["constant"])


class TerminalPreset(FunctionPreset):
    """Common interface of the terminal costs, returns [n]."""

    @abstractmethod
    def __call__(self, x: np.ndarray) -> np.ndarray:
        ...


class LinearTerminal(TerminalPreset):
    """Psi(x) = a.x + b."""
    family = PresetFamily.LINEAR_TERMINAL
    coefficient_shapes = {"weights": (("d",), False), "constant": ((), False)}

    def __call__(self, x: np.ndarray) -> np.ndarray:
        c = self.coefficients
        return _dot(c["weights"], x) + float(c["constant"])


class QuadraticTerminal(TerminalPreset):
    """Psi(x) = x'Px + a.x + b."""
    family = PresetFamily.QUADRATIC_TERMINAL
    coefficient_shapes = {
        "matrix": (("d", "d"), False),
        "weights": (("d",), False),
        "constant": ((), False),
    }

    def __call__(self, x: np.ndarray) -> np.ndarray:
        c = self.coefficients
        out = _quadratic_form(c["matrix"], x) + _dot(c["weights"], x)
        return out + float(c["constant"])


PRESET_CLASSES = {
    PresetFamily.AFFINE_DRIFT: AffineDrift,
    PresetFamily.CONSTANT_DIFFUSION: ConstantDiffusion,
    PresetFamily.AFFINE_DIFFUSION: AffineDiffusion,
    PresetFamily.QUADRATIC_COST: QuadraticCost,
    PresetFamily.LINEAR_TERMINAL: LinearTerminal,
    PresetFamily.QUADRATIC_TERMINAL: QuadraticTerminal,
}


def preset_from_dict(data: Any, role: PresetRole, sizes: Dict[str, int]) -> FunctionPreset:
    """Build the preset filling ``role`` from its problem-file record."""
    if not isinstance(data, dict) or "family" not in data:
        raise ProblemConfigError([f"{role.value}: expected an object with a 'family' key"])
    try:
        family = PresetFamily(data["family"])
    except ValueError:
        raise ProblemConfigError([f"{role.value}: unknown preset id '{data['family']}'"])
    if family not in ROLE_FAMILIES[role]:
        allowed = ", ".join(sorted(f.value for f in ROLE_FAMILIES[role]))
        raise ProblemConfigError([f"{role.value}: family '{family.value}' not allowed (expected {allowed})"])
    raw = {key: value for key, value in data.items() if key != "family"}
    try:
        return PRESET_CLASSES[family].build(raw, sizes)
    except ProblemConfigError as e:
        raise ProblemConfigError([f"{role.value}: {issue}" for issue in e.issues])


def control_size_for(role: PresetRole, mv: int, mw: int) -> Optional[int]:
    if role is PresetRole.LEADER_COST:
        return mv
    if role is PresetRole.FOLLOWER_COST:
        return mw
    return None
