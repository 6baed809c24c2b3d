"""
HRC - Hierarchical Risk-averse Control toolkit

Simulation, g-expectation BSDE evaluation and coupled HJB grid solvers for
leader/follower risk-averse control of diffusion processes.
"""

__version__ = "1.0.0"

__all__ = ["__version__"]
