"""
Structured run logging for HRC commands.

Library modules log through the standard ``logging`` tree under ``hrc``;
``RunLogger`` routes that tree to stderr (and an optional file) and adds
structlog event methods for the milestones of a run.
"""

import itertools
import logging
import sys
import time
from datetime import datetime
from typing import Any, Dict, List, Optional, Sequence

import structlog

from ..core.config import HRCConfig, LogFormat


_HANDLER_TAG = "_hrc_run_handler"


class RunLogger:
    """
    Structured logger for one HRC run: validation, simulation, BSDE solves,
    grid sweeps, cross-validation and artifact writes.
    """

    def __init__(self, config: HRCConfig, stream=None):
        self.config = config
        self.stream = stream if stream is not None else sys.stderr
        self._setup_structured_logging()

        self.run_logger = structlog.get_logger("hrc.run")
        self.mc_logger = structlog.get_logger("hrc.mc")
        self.grid_logger = structlog.get_logger("hrc.grid")
        self.artifact_logger = structlog.get_logger("hrc.artifact")

        self.performance_metrics: Dict[str, Dict[str, Any]] = {}
        self._timer_ids = itertools.count()

    def _setup_structured_logging(self):
        """Configure structlog over the stdlib ``hrc`` logger."""
        monitoring = self.config.monitoring
        renderer = (structlog.processors.JSONRenderer()
                    if monitoring.log_format is LogFormat.JSON
                    else structlog.dev.ConsoleRenderer(colors=False))
        structlog.configure(
            processors=[
                structlog.stdlib.filter_by_level,
                structlog.stdlib.add_logger_name,
                structlog.stdlib.add_log_level,
                structlog.stdlib.PositionalArgumentsFormatter(),
                structlog.processors.TimeStamper(fmt="iso"),
                structlog.processors.StackInfoRenderer(),
                structlog.processors.format_exc_info,
                structlog.processors.UnicodeDecoder(),
                renderer,
            ],
            context_class=dict,
            logger_factory=structlog.stdlib.LoggerFactory(),
            wrapper_class=structlog.stdlib.BoundLogger,
            cache_logger_on_first_use=False,
        )

        root = logging.getLogger("hrc")
        for handler in list(root.handlers):
            if getattr(handler, _HANDLER_TAG, False):
                root.removeHandler(handler)
                handler.close()
        handlers: List[logging.Handler] = [logging.StreamHandler(self.stream)]
        if monitoring.log_file_path:
            handlers.append(logging.FileHandler(monitoring.log_file_path))
        for handler in handlers:
            handler.setFormatter(logging.Formatter("%(message)s"))
            setattr(handler, _HANDLER_TAG, True)
            root.addHandler(handler)
        root.setLevel(getattr(logging, monitoring.log_level.value))

    def log_validation(self, problem_digest: str, passed: bool, failures: Sequence[str],
                       samples: int, seed: int):
        """Log an assumption-validation run."""
        log = self.run_logger.info if passed else self.run_logger.warning
        log(
            "Assumption validation completed",
            problem_digest=problem_digest,
            passed=passed,
            failures=list(failures),
            samples=samples,
            seed=seed,
        )

    def log_simulation(self, n_paths: int, n_steps: int, dt: float, seed: int, threads: int,
                       duration: float):
        self.mc_logger.info(
            "Simulation completed",
            n_paths=n_paths,
            n_steps=n_steps,
            dt=dt,
            seed=seed,
            threads=threads,
            duration_seconds=duration,
        )

    def log_bsde_solve(self, player: str, y0: float, standard_error: float,
                       regression_error: float, max_condition_number: float):
        self.mc_logger.info(
            "BSDE solved",
            player=player,
            y0=y0,
            standard_error=standard_error,
            regression_error=regression_error,
            max_condition_number=max_condition_number,
        )

    def log_sweep(self, grid_shape: Sequence[int], n_t: int, dt: float, cfl_number: float,
                  follower_ties: int, leader_ties: int, duration: float):
        """Log a completed backward sweep."""
        self.grid_logger.info(
            "Backward sweep completed",
            grid_shape=list(grid_shape),
            n_t=n_t,
            dt=dt,
            cfl_number=cfl_number,
            follower_ties=follower_ties,
            leader_ties=leader_ties,
            duration_seconds=duration,
        )

    def log_cross_validation(self, grid_values: Sequence[float], mc_values: Sequence[float],
                             standard_errors: Sequence[float], gaps: Sequence[float]):
        self.grid_logger.info(
            "Cross-validation completed",
            grid_values=list(grid_values),
            mc_values=list(mc_values),
            standard_errors=list(standard_errors),
            gaps=list(gaps),
        )

    def log_artifact(self, kind: str, path: str, sha256: str):
        self.artifact_logger.info("Artifact written", kind=kind, path=path, sha256=sha256,
                                  timestamp=datetime.now().isoformat())

    def log_failure(self, command: str, error: BaseException, exit_code: int):
        self.run_logger.error(
            "Command failed",
            command=command,
            error_type=type(error).__name__,
            error=str(error),
            exit_code=exit_code,
        )

    def start_performance_timer(self, operation_id: str) -> str:
        """Start performance timer for an operation."""
        timer_id = f"{operation_id}_{next(self._timer_ids)}"
        self.performance_metrics[timer_id] = {
            "start_time": time.perf_counter(),
            "operation_id": operation_id,
        }
        return timer_id

    def end_performance_timer(self, timer_id: str) -> float:
        """End performance timer and return duration."""
        timer = self.performance_metrics.pop(timer_id, None)
        if timer is None:
            return 0.0
        duration = time.perf_counter() - timer["start_time"]
        self.run_logger.debug(
            "Operation completed",
            operation_id=timer["operation_id"],
            duration_seconds=duration,
            timer_id=timer_id,
        )
        return duration

    def get_logger(self, component: str) -> structlog.BoundLogger:
        """Get logger for specific component."""
        return structlog.get_logger(f"hrc.{component}")
