"""
Monitoring Tests

Unit tests for run metrics and structured run logging.
"""

import io
import json
from concurrent.futures import ThreadPoolExecutor

import pytest

from hrc.core import HRCConfig
from hrc.core.config import LogFormat, LogLevel
from hrc.monitoring import MetricsCollector, RunLogger


def _config(level=LogLevel.INFO, fmt=LogFormat.JSON, log_file=""):
    config = HRCConfig()
    config.monitoring.log_level = level
    config.monitoring.log_format = fmt
    config.monitoring.log_file_path = log_file
    return config


def _records(stream):
    return [json.loads(line) for line in stream.getvalue().splitlines() if line.strip()]


class TestMetricsCollector:
    """Test cases for MetricsCollector."""

    @pytest.fixture
    def metrics(self):
        return MetricsCollector()

    def test_counters_and_gauges(self, metrics):
        """Test increments and gauge overwrite."""
        metrics.increment("regressions")
        metrics.increment("regressions", 15)
        metrics.set_gauge("cfl_number", 0.5)
        metrics.set_gauge("cfl_number", 0.9)
        summary = metrics.summary()

        assert summary["counters"] == {"regressions": 16}
        assert summary["gauges"] == {"cfl_number": 0.9}

    def test_timed_operations(self, metrics):
        """Test that each timed block adds one sample."""
        for _ in range(3):
            with metrics.timed("sweep"):
                pass
        timings = metrics.summary()["timings"]

        assert timings["sweep"]["count"] == 3
        assert timings["sweep"]["total_seconds"] >= 0.0
        assert timings["sweep"]["p50_seconds"] <= timings["sweep"]["p99_seconds"]
        assert "dpp" not in timings

    def test_timer_recorded_on_error(self, metrics):
        """Test that a failing block is still timed."""
        with pytest.raises(RuntimeError):
            with metrics.timed("simulate"):
                raise RuntimeError("boom")
        assert metrics.summary()["timings"]["simulate"]["count"] == 1

    def test_unknown_timer(self, metrics):
        """Test ending a timer that was never started."""
        assert metrics.end_timer("missing_0") == 0.0

    def test_concurrent_increments(self, metrics):
        """Test counters under concurrent updates."""
        with ThreadPoolExecutor(max_workers=4) as pool:
            list(pool.map(lambda _: metrics.increment("paths", 10), range(400)))
        assert metrics.summary()["counters"]["paths"] == 4000


class TestRunLogger:
    """Test cases for RunLogger."""

    def test_json_events(self):
        """Test one JSON object per event with its fields."""
        stream = io.StringIO()
        logger = RunLogger(_config(), stream=stream)
        logger.log_sweep((21,), 14, 1.0 / 14, 0.85, 3, 0, 0.01)
        logger.log_artifact("fields", "out/fields.csv", "ab" * 32)
        sweep, artifact = _records(stream)

        assert sweep["event"] == "Backward sweep completed"
        assert sweep["logger"] == "hrc.grid"
        assert sweep["level"] == "info"
        assert sweep["grid_shape"] == [21]
        assert sweep["follower_ties"] == 3
        assert artifact["kind"] == "fields"
        assert artifact["sha256"] == "ab" * 32

    def test_level_filter(self):
        """Test that events below the configured level are dropped."""
        stream = io.StringIO()
        logger = RunLogger(_config(level=LogLevel.WARNING), stream=stream)
        logger.log_simulation(100, 16, 1.0 / 16, 42, 1, 0.2)
        logger.log_validation("digest", False, ["ellipticity"], 64, 42)
        logger.log_failure("solve", ValueError("bad"), 1)
        records = _records(stream)

        assert [r["event"] for r in records] == ["Assumption validation completed", "Command failed"]
        assert records[0]["failures"] == ["ellipticity"]
        assert records[1]["error_type"] == "ValueError"
        assert records[1]["exit_code"] == 1

    def test_handlers_are_replaced(self):
        """Test that a new run logger takes over the output."""
        first, second = io.StringIO(), io.StringIO()
        RunLogger(_config(), stream=first)
        logger = RunLogger(_config(), stream=second)
        logger.log_bsde_solve("leader", 0.5, 0.01, 1e-3, 12.0)

        assert first.getvalue() == ""
        assert len(_records(second)) == 1

    def test_console_format(self):
        """Test the plain-text renderer."""
        stream = io.StringIO()
        logger = RunLogger(_config(fmt=LogFormat.CONSOLE), stream=stream)
        logger.log_cross_validation((0.5, 0.5), (0.49, 0.51), (0.01, 0.01), (0.01, 0.01))

        assert "Cross-validation completed" in stream.getvalue()

    def test_log_file(self, tmp_path):
        """Test the optional log file."""
        path = tmp_path / "run.log"
        logger = RunLogger(_config(log_file=str(path)), stream=io.StringIO())
        logger.log_simulation(10, 4, 0.25, 0, 1, 0.01)
        RunLogger(_config(), stream=io.StringIO())

        assert json.loads(path.read_text().splitlines()[0])["n_paths"] == 10

    def test_performance_timer(self):
        """Test operation timers."""
        logger = RunLogger(_config(), stream=io.StringIO())
        timer_id = logger.start_performance_timer("sweep")

        assert timer_id.startswith("sweep_")
        assert logger.end_performance_timer(timer_id) >= 0.0
        assert logger.end_performance_timer(timer_id) == 0.0
