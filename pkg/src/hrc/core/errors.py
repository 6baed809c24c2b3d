"""
HRC error hierarchy.

Each error class maps onto one CLI exit code (see ``hrc.cli``).
"""

from typing import List


class HRCError(Exception):
    """Base class for all toolkit errors."""


class ProblemConfigError(HRCError, ValueError):
    """A problem file or configuration record is invalid."""

    def __init__(self, issues: List[str]):
        self.issues = list(issues)
        super().__init__("; ".join(self.issues) if self.issues else "invalid problem configuration")


class PreconditionError(HRCError, ValueError):
    """An operation was called with arguments violating its contract."""


class RegressionError(HRCError, ArithmeticError):
    """A least-squares regression step is rank deficient."""

    def __init__(self, step: int, condition_number: float, limit: float):
        self.step = step
        self.condition_number = condition_number
        self.limit = limit
        super().__init__(
            f"regression at step {step} is rank deficient "
            f"(condition number {condition_number:.3e} > {limit:.1e})"
        )


class CflError(HRCError):
    """The explicit scheme's CFL bound is violated by the requested grid."""

    def __init__(self, dt: float, dt_max: float, suggested_n_t: int):
        self.dt = dt
        self.dt_max = dt_max
        self.suggested_n_t = suggested_n_t
        super().__init__(
            f"CFL violated: dt={dt:.6g} exceeds bound {dt_max:.6g}; "
            f"use dt <= {dt_max:.6g} (n_t >= {suggested_n_t})"
        )
