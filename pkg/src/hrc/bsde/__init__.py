"""
g-expectation BSDE solver, dynamic risk measure and property harness.
"""

from .axioms import AxiomSuiteReport, run_axiom_suite
from .basis import RegressionBasis
from .risk import (
    ComparisonReport, RiskValueResult, TimeConsistencyReport, comparison_check,
    evaluate_risk_value, risk_value, time_consistency_check,
)
from .solver import BsdeSolution, conditional_g_expectation, risk_measure, solve_bsde

__all__ = [
    "AxiomSuiteReport", "run_axiom_suite",
    "RegressionBasis",
    "ComparisonReport", "RiskValueResult", "TimeConsistencyReport", "comparison_check",
    "evaluate_risk_value", "risk_value", "time_consistency_check",
    "BsdeSolution", "conditional_g_expectation", "risk_measure", "solve_bsde",
]
