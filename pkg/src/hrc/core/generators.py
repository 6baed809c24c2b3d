"""
BSDE generators g(t, z).

Generators depend on (t, z) only; the y slot of the general driver is
dropped throughout the toolkit.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np

from .errors import PreconditionError, ProblemConfigError


logger = logging.getLogger(__name__)


class GeneratorPreset(str, Enum):
    """Catalog of admissible generators."""
    ZERO = "zero"
    SCALED_L1 = "scaled-l1"
    SCALED_QUADRATIC = "scaled-quadratic"


@dataclass(frozen=True)
class Generator:
    """A z-only generator from the preset catalog."""
    preset: GeneratorPreset = GeneratorPreset.ZERO
    kappa: float = 0.0

    def __post_init__(self):
        if self.kappa < 0 or not np.isfinite(self.kappa):
            raise ProblemConfigError([f"kappa must be a nonnegative real, got {self.kappa}"])

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Generator":
        """Create a generator from its problem-file record."""
        if not isinstance(data, dict):
            raise ProblemConfigError(["generator must be an object with keys {preset, kappa}"])
        unknown = sorted(set(data) - {"preset", "kappa"})
        issues = [f"unknown key '{key}'" for key in unknown]
        try:
            preset = GeneratorPreset(data.get("preset", "zero"))
        except ValueError:
            issues.append(f"unknown preset id '{data.get('preset')}'")
            preset = GeneratorPreset.ZERO
        kappa = data.get("kappa", 0.0)
        if not isinstance(kappa, (int, float)) or isinstance(kappa, bool):
            issues.append("kappa must be a number")
            kappa = 0.0
        elif kappa < 0:
            issues.append("kappa must be nonnegative")
        if issues:
            raise ProblemConfigError(issues)
        return cls(preset=preset, kappa=float(kappa))

    def to_dict(self) -> Dict[str, Any]:
        return {"preset": self.preset.value, "kappa": self.kappa}

    def __call__(self, t: float, z: np.ndarray) -> np.ndarray:
        """Evaluate g(t, z) over the trailing axis of ``z``."""
        z = np.asarray(z, dtype=float)
        if self.preset is GeneratorPreset.ZERO:
            return np.zeros(z.shape[:-1])
        if self.preset is GeneratorPreset.SCALED_L1:
            return self.kappa * np.sum(np.abs(z), axis=-1)
        return 0.5 * self.kappa * np.sum(z * z, axis=-1)

    @property
    def lipschitz_constant(self) -> Optional[float]:
        """Global Lipschitz constant w.r.t. the l1 norm, None if unbounded."""
        if self.preset is GeneratorPreset.ZERO:
            return 0.0
        if self.preset is GeneratorPreset.SCALED_L1:
            return self.kappa
        return None if self.kappa > 0 else 0.0

    @property
    def is_positively_homogeneous(self) -> bool:
        return self.preset is not GeneratorPreset.SCALED_QUADRATIC or self.kappa == 0.0

    @property
    def is_convex(self) -> bool:
        return True


def eval_generator(gen: Generator, t: float, z: np.ndarray, dim: Optional[int] = None) -> float:
    """Evaluate a generator at a single z vector, checking its dimension."""
    z = np.asarray(z, dtype=float)
    if z.ndim != 1:
        raise PreconditionError(f"z must be a vector, got shape {z.shape}")
    if dim is not None and z.shape[0] != dim:
        raise PreconditionError(f"z has dimension {z.shape[0]}, expected {dim}")
    return float(gen(t, z))
