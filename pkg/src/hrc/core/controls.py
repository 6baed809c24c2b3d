"""
Finite control sets.

The compact leader/follower control sets are realized as uniform grids over
axis-aligned boxes, enumerated in lexicographic order. Argmins over a control
set break ties by the lowest index, i.e. the lexicographically-first point.
"""

import itertools
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from .errors import ProblemConfigError


@dataclass(frozen=True)
class ControlSet:
    """Uniform grid discretization of a box of controls."""
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    points_per_coordinate: Tuple[int, ...]
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        issues = self._check()
        if issues:
            raise ProblemConfigError(issues)
        axes = [
            np.linspace(lo, hi, n) if n > 1 else np.array([0.5 * (lo + hi)])
            for lo, hi, n in zip(self.lower, self.upper, self.points_per_coordinate)
        ]
        points = np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, len(axes))
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    def _check(self) -> List[str]:
        issues = []
        m = len(self.lower)
        if m == 0:
            issues.append("control set needs at least one coordinate")
        if len(self.upper) != m or len(self.points_per_coordinate) != m:
            issues.append("lower, upper and points must have the same length")
            return issues
        for i, (lo, hi, n) in enumerate(zip(self.lower, self.upper, self.points_per_coordinate)):
            if not (np.isfinite(lo) and np.isfinite(hi)):
                issues.append(f"coordinate {i}: bounds must be finite")
            if hi < lo:
                issues.append(f"coordinate {i}: upper bound {hi} below lower bound {lo}")
            if n < 1:
                issues.append(f"coordinate {i}: empty control set (points={n})")
            elif n > 1 and hi == lo:
                issues.append(f"coordinate {i}: {n} points on a degenerate interval would duplicate")
        return issues

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ControlSet":
        if not isinstance(data, dict):
            raise ProblemConfigError(["control set must be an object with keys {lower, upper, points}"])
        issues = [f"unknown key '{key}'" for key in sorted(set(data) - {"lower", "upper", "points"})]
        missing = [key for key in ("lower", "upper", "points") if key not in data]
        issues.extend(f"missing key '{key}'" for key in missing)
        if issues:
            raise ProblemConfigError(issues)
        try:
            lower = tuple(float(x) for x in data["lower"])
            upper = tuple(float(x) for x in data["upper"])
            raw_points = list(data["points"])
        except (TypeError, ValueError) as e:
            raise ProblemConfigError([f"control set bounds and points must be numeric lists ({e})"])
        bad = [n for n in raw_points if isinstance(n, bool) or not isinstance(n, (int, np.integer))]
        if bad:
            raise ProblemConfigError([f"control set points must be integers, got {bad}"])
        points = tuple(int(n) for n in raw_points)
        return cls(lower=lower, upper=upper, points_per_coordinate=points)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lower": list(self.lower),
            "upper": list(self.upper),
            "points": list(self.points_per_coordinate),
        }

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def __len__(self) -> int:
        return self.size

    def point(self, index: int) -> np.ndarray:
        return self.points[index]

    def index_of(self, point: Sequence[float], atol: float = 1e-12) -> int:
        """Index of a control point, raising KeyError if absent."""
        dist = np.max(np.abs(self.points - np.asarray(point, dtype=float)), axis=1)
        idx = int(np.argmin(dist))
        if dist[idx] > atol:
            raise KeyError(f"{list(point)} is not a point of the control set")
        return idx

    def contains(self, point: Sequence[float], atol: float = 1e-12) -> bool:
        try:
            self.index_of(point, atol)
            return True
        except KeyError:
            return False
