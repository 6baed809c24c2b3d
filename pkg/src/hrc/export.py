"""
Artifact writers: CSV tables, JSON reports and the run manifest.

CSV floats carry 17 significant digits and columns come in a fixed order,
so identical runs produce byte-identical files.
"""

import hashlib
import json
import logging
import platform
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from . import __version__
from .bsde.solver import BsdeSolution
from .hjb.sweep import HierarchicalSolution
from .sim.paths import PathBundle


logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def _with_final_step(values: np.ndarray, n_steps: int) -> np.ndarray:
    """Pad a per-interval array [n, n_steps, m] with NaN at the final step."""
    pad = np.full((values.shape[0], 1) + values.shape[2:], np.nan)
    return np.concatenate([values, pad], axis=1) if n_steps else pad


def _write_csv(frame: pd.DataFrame, path: Path, digits: int = 17) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=f"%.{digits}g", lineterminator="\n")
    return path


def paths_frame(bundle: PathBundle) -> pd.DataFrame:
    """Columns path, step, t, x_1..x_d, v_1.., w_1.. (controls blank at the final step)."""
    n, steps = bundle.n_paths, bundle.n_steps
    columns: Dict[str, np.ndarray] = {
        "path": np.repeat(np.arange(n), steps + 1),
        "step": np.tile(np.arange(steps + 1), n),
        "t": np.tile(bundle.times, n),
    }
    for i in range(bundle.dim):
        columns[f"x_{i + 1}"] = bundle.states[:, :, i].ravel()
    v = _with_final_step(bundle.leader_controls_applied, steps)
    w = _with_final_step(bundle.follower_controls_applied, steps)
    for j in range(v.shape[2]):
        columns[f"v_{j + 1}"] = v[:, :, j].ravel()
    for j in range(w.shape[2]):
        columns[f"w_{j + 1}"] = w[:, :, j].ravel()
    return pd.DataFrame(columns)


def bsde_frame(bundle: PathBundle, solution: BsdeSolution) -> pd.DataFrame:
    """Columns path, step, t, y, z_1..z_d (z blank at the final step)."""
    n, steps = solution.y.shape[0], solution.y.shape[1] - 1
    columns: Dict[str, np.ndarray] = {
        "path": np.repeat(np.arange(n), steps + 1),
        "step": np.tile(np.arange(steps + 1), n),
        "t": np.tile(bundle.times[:steps + 1], n),
        "y": solution.y.ravel(),
    }
    z = _with_final_step(solution.z, steps)
    for j in range(z.shape[2]):
        columns[f"z_{j + 1}"] = z[:, :, j].ravel()
    return pd.DataFrame(columns)


def fields_frame(solution: HierarchicalSolution) -> pd.DataFrame:
    """Columns k, t, x_1.., phi1, phi2, v_star_1.., w_star_1.. (controls blank at k = n_t)."""
    grid = solution.grid
    spec = grid.spec
    n, n_t = grid.n_nodes, grid.n_t
    columns: Dict[str, np.ndarray] = {
        "k": np.repeat(np.arange(n_t + 1), n),
        "t": np.repeat(grid.times, n),
    }
    for i in range(grid.dim):
        columns[f"x_{i + 1}"] = np.tile(grid.nodes[:, i], n_t + 1)
    columns["phi1"] = solution.leader.values.ravel()
    columns["phi2"] = solution.follower.values.ravel()
    for name, table, points in (("v_star", solution.policy.leader, spec.leader_controls.points),
                                ("w_star", solution.policy.follower, spec.follower_controls.points)):
        chosen = np.concatenate([points[table], np.full((1, n, points.shape[1]), np.nan)], axis=0)
        for j in range(points.shape[1]):
            columns[f"{name}_{j + 1}"] = chosen[:, :, j].ravel()
    return pd.DataFrame(columns)


def write_paths_csv(bundle: PathBundle, path: Union[str, Path], digits: int = 17) -> Path:
    return _write_csv(paths_frame(bundle), Path(path), digits)


def write_bsde_csv(bundle: PathBundle, solution: BsdeSolution, path: Union[str, Path],
                   digits: int = 17) -> Path:
    return _write_csv(bsde_frame(bundle, solution), Path(path), digits)


def write_fields_csv(solution: HierarchicalSolution, path: Union[str, Path], digits: int = 17) -> Path:
    return _write_csv(fields_frame(solution), Path(path), digits)


def _json_default(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if hasattr(value, "value"):
        return value.value
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def to_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, default=_json_default)


def write_json(data: Any, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_json(data) + "\n")
    return path


def sha256_file(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    """Inputs, seeds, grid parameters and output digests of one command run."""
    command: str
    settings: Dict[str, Any]
    problem_digest: Optional[str] = None
    problem_source: Optional[str] = None
    seeds: List[int] = field(default_factory=list)
    grid: Optional[Dict[str, Any]] = None
    artifacts: Dict[str, Dict[str, str]] = field(default_factory=dict)
    metrics: Dict[str, Any] = field(default_factory=dict)
    started: str = field(default_factory=lambda: datetime.now().isoformat())
    finished: Optional[str] = None
    wall_clock_seconds: Optional[float] = None

    def add_artifact(self, name: str, path: Union[str, Path]) -> str:
        digest = sha256_file(path)
        self.artifacts[name] = {"path": Path(path).name, "sha256": digest}
        return digest

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tool": "hrc",
            "version": __version__,
            "python": platform.python_version(),
            "command": self.command,
            "problem_source": self.problem_source,
            "problem_digest": self.problem_digest,
            "settings": self.settings,
            "seeds": list(self.seeds),
            "grid": self.grid,
            "artifacts": self.artifacts,
            "metrics": self.metrics,
            "started": self.started,
            "finished": self.finished,
            "wall_clock_seconds": self.wall_clock_seconds,
        }

    def write(self, out_dir: Union[str, Path], wall_clock_seconds: float) -> Path:
        self.finished = datetime.now().isoformat()
        self.wall_clock_seconds = wall_clock_seconds
        path = write_json(self.to_dict(), Path(out_dir) / "manifest.json")
        logger.debug("Manifest written to %s", path)
        return path
