"""
Problem-core: problem instances, generators, presets and assumption checks.
"""

from .assumptions import AssumptionReport, CheckStatus, validate_assumptions
from .catalog import builtin_config, builtin_problem
from .config import HRCConfig, load_config
from .controls import ControlSet
from .errors import CflError, HRCError, PreconditionError, ProblemConfigError, RegressionError
from .generators import Generator, GeneratorPreset, eval_generator
from .problem import Box, Player, ProblemSpec, build_problem, load_problem

__all__ = [
    "AssumptionReport", "CheckStatus", "validate_assumptions",
    "builtin_config", "builtin_problem",
    "HRCConfig", "load_config",
    "ControlSet",
    "CflError", "HRCError", "PreconditionError", "ProblemConfigError", "RegressionError",
    "Generator", "GeneratorPreset", "eval_generator",
    "Box", "Player", "ProblemSpec", "build_problem", "load_problem",
]
