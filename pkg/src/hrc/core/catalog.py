"""
Built-in problem fixtures.

Each entry returns a problem-file record (plain dict) that ``build_problem``
accepts, so fixtures go through the same validation as user files.
"""

import copy
from typing import Any, Callable, Dict, List, Optional

from .errors import ProblemConfigError
from .problem import ProblemSpec, build_problem


def _interval_controls(lo: float, hi: float, points: int) -> Dict[str, Any]:
    return {"lower": [lo], "upper": [hi], "points": [points]}


def _zero_controls(dim: int = 1) -> Dict[str, Any]:
    return {"lower": [0.0] * dim, "upper": [0.0] * dim, "points": [1] * dim}


def _base(dim: int = 1) -> Dict[str, Any]:
    return {
        "horizon": 1.0,
        "dim": dim,
        "drift": {"family": "affine-drift"},
        "diffusion": {"family": "constant-diffusion", "matrix": [[0.5 if i == j else 0.0
                                                                  for j in range(dim)]
                                                                 for i in range(dim)]},
        "leader_cost": {"family": "quadratic-cost"},
        "follower_cost": {"family": "quadratic-cost"},
        "leader_terminal": {"family": "quadratic-terminal"},
        "follower_terminal": {"family": "quadratic-terminal"},
        "leader_generator": {"preset": "zero", "kappa": 0.0},
        "follower_generator": {"preset": "zero", "kappa": 0.0},
        "leader_controls": _zero_controls(),
        "follower_controls": _zero_controls(),
        "domain_box": {"lower": [-3.0] * dim, "upper": [3.0] * dim},
        "ellipticity_floor": 0.1,
        "initial_state": [0.0] * dim,
    }


def zero_cost() -> Dict[str, Any]:
    """Controlled dynamics, all costs zero, scaled-l1 generators."""
    config = _base()
    config.update({
        "drift": {"family": "affine-drift", "leader": [[1.0]], "follower": [[1.0]]},
        "leader_generator": {"preset": "scaled-l1", "kappa": 0.2},
        "follower_generator": {"preset": "scaled-l1", "kappa": 0.2},
        "leader_controls": _interval_controls(-1.0, 1.0, 3),
        "follower_controls": _interval_controls(-1.0, 1.0, 3),
        "initial_state": [0.5],
    })
    return config


def decoupled() -> Dict[str, Any]:
    """f = v + w, c1 = v^2, c2 = w^2, zero terminals and generators."""
    config = _base()
    config.update({
        "drift": {"family": "affine-drift", "leader": [[1.0]], "follower": [[1.0]]},
        "leader_cost": {"family": "quadratic-cost", "control": [[1.0]]},
        "follower_cost": {"family": "quadratic-cost", "control": [[1.0]]},
        "leader_controls": _interval_controls(-1.0, 1.0, 3),
        "follower_controls": _interval_controls(-1.0, 1.0, 3),
    })
    return config


def heat(sigma: float = 0.5, x0: float = 0.5) -> Dict[str, Any]:
    """f = 0, sigma = s, Psi(x) = x^2: phi(0, x) = x^2 + s^2 T."""
    config = _base()
    config.update({
        "diffusion": {"family": "constant-diffusion", "matrix": [[sigma]]},
        "leader_terminal": {"family": "quadratic-terminal", "matrix": [[1.0]]},
        "follower_terminal": {"family": "quadratic-terminal", "matrix": [[1.0]]},
        "domain_box": {"lower": [-4.0], "upper": [4.0]},
        "initial_state": [x0],
    })
    return config


def ou_heat(rate: float = 1.0, sigma: float = 0.5, x0: float = 0.5) -> Dict[str, Any]:
    """Mean-reverting variant of ``heat``: f(x) = -rate x; first-order in time."""
    config = heat(sigma=sigma, x0=x0)
    config["drift"] = {"family": "affine-drift", "state": [[-rate]]}
    return config


def lq_decoupled(kappa: float = 0.2) -> Dict[str, Any]:
    """d = 1, f = v + w, sigma = 0.5, quadratic costs, scaled-l1 generators."""
    config = _base()
    config.update({
        "drift": {"family": "affine-drift", "leader": [[1.0]], "follower": [[1.0]]},
        "leader_cost": {"family": "quadratic-cost", "control": [[1.0]]},
        "follower_cost": {"family": "quadratic-cost", "control": [[1.0]]},
        "leader_terminal": {"family": "quadratic-terminal", "matrix": [[1.0]]},
        "follower_terminal": {"family": "quadratic-terminal", "matrix": [[1.0]]},
        "leader_generator": {"preset": "scaled-l1", "kappa": kappa},
        "follower_generator": {"preset": "scaled-l1", "kappa": kappa},
        "leader_controls": _interval_controls(-1.0, 1.0, 5),
        "follower_controls": _interval_controls(-1.0, 1.0, 5),
        "initial_state": [0.5],
    })
    return config


def brownian(dim: int = 1, horizon: float = 1.0) -> Dict[str, Any]:
    """f = 0, sigma = identity, x0 = 0: the state is the driving Brownian motion."""
    config = _base(dim)
    config.update({
        "horizon": horizon,
        "diffusion": {"family": "constant-diffusion",
                      "matrix": [[1.0 if i == j else 0.0 for j in range(dim)] for i in range(dim)]},
        "leader_controls": _zero_controls(),
        "follower_controls": _zero_controls(),
        "domain_box": {"lower": [-10.0 * horizon ** 0.5] * dim, "upper": [10.0 * horizon ** 0.5] * dim},
        "ellipticity_floor": 0.5,
    })
    return config


BUILTIN_PROBLEMS: Dict[str, Callable[..., Dict[str, Any]]] = {
    "zero-cost": zero_cost,
    "decoupled": decoupled,
    "heat": heat,
    "ou-heat": ou_heat,
    "lq-decoupled": lq_decoupled,
    "brownian": brownian,
}


def builtin_names() -> List[str]:
    return sorted(BUILTIN_PROBLEMS)


def builtin_config(name: str, params: Optional[Dict[str, Any]] = None,
                   **overrides: Any) -> Dict[str, Any]:
    """Problem-file record of a built-in fixture, with fixture parameters and top-level overrides."""
    if name not in BUILTIN_PROBLEMS:
        raise ProblemConfigError([f"unknown builtin problem '{name}' (known: {', '.join(builtin_names())})"])
    config = copy.deepcopy(BUILTIN_PROBLEMS[name](**(params or {})))
    config.update(copy.deepcopy(overrides))
    return config


def builtin_problem(name: str, params: Optional[Dict[str, Any]] = None, **overrides: Any) -> ProblemSpec:
    return build_problem(builtin_config(name, params, **overrides))
