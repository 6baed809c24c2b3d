"""
Forward simulation of the controlled diffusion under feedback policies.
"""

from .paths import (
    PathBundle, accumulate_cost, brownian_only, constant_policies, running_cost_integral, simulate,
)
from .policies import ConstantPolicy, FeedbackPolicy, TabulatedPolicy

__all__ = [
    "PathBundle", "accumulate_cost", "brownian_only", "constant_policies",
    "running_cost_integral", "simulate",
    "ConstantPolicy", "FeedbackPolicy", "TabulatedPolicy",
]
