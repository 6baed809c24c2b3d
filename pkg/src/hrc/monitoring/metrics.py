"""
Metrics collection for HRC runs.

Wall-clock timings (with percentiles) per operation, counters (regressions, tie-break nodes,
paths simulated) and gauges. The summary is written into the run manifest;
nothing here feeds back into numerical results.
"""

import itertools
import threading
import time
from collections import defaultdict
from contextlib import contextmanager
from datetime import datetime
from typing import Any, Dict, Iterator, List


class MetricsCollector:
    """Thread-safe counters, gauges and timing histograms."""

    def __init__(self):
        self.counters: Dict[str, int] = defaultdict(int)
        self.gauges: Dict[str, float] = {}
        self.histograms: Dict[str, List[float]] = defaultdict(list)
        self.active_timers: Dict[str, Dict[str, Any]] = {}
        self._timer_ids = itertools.count()
        self.lock = threading.Lock()

    def increment(self, name: str, by: int = 1):
        with self.lock:
            self.counters[name] += by

    def set_gauge(self, name: str, value: float):
        with self.lock:
            self.gauges[name] = float(value)

    def start_timer(self, operation_name: str) -> str:
        """Start a performance timer."""
        with self.lock:
            timer_id = f"{operation_name}_{next(self._timer_ids)}"
            self.active_timers[timer_id] = {
                "operation": operation_name,
                "start_time": time.perf_counter(),
            }
        return timer_id

    def end_timer(self, timer_id: str) -> float:
        """End a performance timer and record the duration."""
        with self.lock:
            timer = self.active_timers.pop(timer_id, None)
            if timer is None:
                return 0.0
            duration = time.perf_counter() - timer["start_time"]
            self.histograms[f"operation_time_{timer['operation']}"].append(duration)
        return duration

    @contextmanager
    def timed(self, operation_name: str) -> Iterator[None]:
        timer_id = self.start_timer(operation_name)
        try:
            yield
        finally:
            self.end_timer(timer_id)

    def summary(self) -> Dict[str, Any]:
        """Counters, gauges and count/total/mean/percentile time per operation."""
        with self.lock:
            histograms = {key: list(values) for key, values in self.histograms.items() if values}
            counters = dict(self.counters)
            gauges = dict(self.gauges)
        timings = {}
        for key, values in histograms.items():
            timings[key[len("operation_time_"):]] = {
                "count": len(values),
                "total_seconds": sum(values),
                "mean_seconds": sum(values) / len(values),
                **_percentiles(values),
            }
        return {
            "timestamp": datetime.now().isoformat(),
            "counters": counters,
            "gauges": gauges,
            "timings": timings,
        }


def _percentiles(values: List[float], percentiles: tuple = (50, 90, 99)) -> Dict[str, float]:
    data = sorted(values)
    result = {}
    for percentile in percentiles:
        index = min(int((percentile / 100.0) * len(data)), len(data) - 1)
        result[f"p{percentile}_seconds"] = data[index]
    return result
