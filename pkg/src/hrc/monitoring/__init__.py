"""
Run logging and metrics.
"""

from .logger import RunLogger
from .metrics import MetricsCollector

__all__ = ["RunLogger", "MetricsCollector"]
