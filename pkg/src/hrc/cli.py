"""
Command-line front end.

    hrc validate | solve | simulate | riskcheck | dpp | crossval

Reports are printed to stdout as JSON and written, with CSV tables and a
run manifest, into --out-dir. Logs go to stderr.

Exit codes: 0 success, 1 input error, 2 validation failure, 3 numerical
precondition failure.
"""

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

from . import __version__
from .bsde import RegressionBasis, evaluate_risk_value, run_axiom_suite
from .core import (
    CflError, Generator, GeneratorPreset, HRCConfig, PreconditionError, ProblemConfigError,
    ProblemSpec, RegressionError, builtin_problem, load_config, load_problem, validate_assumptions,
)
from .core.catalog import builtin_names
from .core.config import LogLevel
from .core.problem import Player
from .export import RunManifest, to_json, write_bsde_csv, write_fields_csv, write_json, write_paths_csv
from .hjb import backward_sweep_hierarchical, build_grid, cross_validate, dpp_residual
from .monitoring import MetricsCollector, RunLogger
from .sim import ConstantPolicy, accumulate_cost, simulate


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


@dataclass
class RunContext:
    """Resolved settings and the run's logging/metrics sinks."""
    command: str
    config: HRCConfig
    run_logger: RunLogger
    metrics: MetricsCollector
    out_dir: Path
    manifest: RunManifest
    spec: Optional[ProblemSpec] = None

    def require_spec(self) -> ProblemSpec:
        if self.spec is None:
            raise ProblemConfigError(["a problem file or --builtin NAME is required"])
        return self.spec

    @property
    def seed(self) -> int:
        return self.config.simulation.seed

    @property
    def threads(self) -> int:
        return self.config.simulation.threads

    @property
    def basis(self) -> RegressionBasis:
        return RegressionBasis(self.config.regression.degree, self.config.regression.condition_limit)

    def emit(self, name: str, report: Dict[str, Any]) -> None:
        """Print a report and write it into the output directory."""
        path = write_json(report, self.out_dir / f"{name}.json")
        self.artifact(name, path)
        print(to_json(report))

    def artifact(self, name: str, path: Path) -> None:
        digest = self.manifest.add_artifact(name, path)
        self.run_logger.log_artifact(name, str(path), digest)


def _resolve_config(args: argparse.Namespace) -> HRCConfig:
    """Defaults < environment < settings file < command-line flags."""
    config = load_config(args.config)
    if args.seed is not None:
        config.simulation.seed = args.seed
    if args.threads is not None:
        config.simulation.threads = args.threads
    if getattr(args, "paths", None) is not None:
        config.simulation.n_paths = args.paths
    if getattr(args, "mc_dt", None) is not None:
        config.simulation.dt = args.mc_dt
    if getattr(args, "grid_nodes", None) is not None:
        config.grid.nodes_per_axis = args.grid_nodes
    if getattr(args, "n_t", None) is not None:
        config.grid.n_t = args.n_t
        config.grid.dt = None
    if getattr(args, "grid_dt", None) is not None:
        config.grid.dt = args.grid_dt
        config.grid.n_t = None
    if getattr(args, "degree", None) is not None:
        config.regression.degree = args.degree
    if args.out_dir is not None:
        config.output.out_dir = args.out_dir
    if args.log_level is not None:
        config.monitoring.log_level = LogLevel(args.log_level.upper())
    if getattr(args, "dump_paths", False):
        config.output.dump_paths = True
    if getattr(args, "dump_bsde", False):
        config.output.dump_bsde = True
    issues = config.validate()
    if issues:
        raise ProblemConfigError([f"settings: {issue}" for issue in issues])
    return config


def _load_spec(args: argparse.Namespace) -> Tuple[Optional[ProblemSpec], Optional[str]]:
    if args.builtin and args.problem:
        raise ProblemConfigError(["give a problem file or --builtin, not both"])
    if args.builtin:
        return builtin_problem(args.builtin), f"builtin:{args.builtin}"
    if args.problem:
        return load_problem(args.problem), str(args.problem)
    return None, None


def _validated(ctx: RunContext, spec: ProblemSpec, samples: int = 4096):
    """Assumption report with failures logged."""
    with ctx.metrics.timed("validate"):
        report = validate_assumptions(spec, samples=samples, seed=ctx.seed)
    failures = [check.name for check in report.failures]
    ctx.run_logger.log_validation(spec.digest, report.passed, failures, samples, ctx.seed)
    return report


def _solve(ctx: RunContext, spec: ProblemSpec):
    grid_config = ctx.config.grid
    with ctx.metrics.timed("sweep"):
        timer_id = ctx.run_logger.start_performance_timer("sweep")
        grid = build_grid(spec, grid_config.nodes_per_axis, n_t=grid_config.n_t, dt=grid_config.dt,
                          cfl_safety=grid_config.cfl_safety)
        solution = backward_sweep_hierarchical(spec, grid, threads=ctx.threads)
        duration = ctx.run_logger.end_performance_timer(timer_id)
    report = solution.report
    ctx.metrics.set_gauge("cfl_number", grid.cfl_number)
    ctx.metrics.increment("follower_tie_nodes", report.follower_ties)
    ctx.metrics.increment("leader_tie_nodes", report.leader_ties)
    ctx.run_logger.log_sweep(grid.shape, grid.n_t, grid.dt, grid.cfl_number,
                             report.follower_ties, report.leader_ties, duration)
    ctx.manifest.grid = grid.describe()
    return solution


def _require_valid(ctx: RunContext, spec: ProblemSpec) -> bool:
    report = _validated(ctx, spec)
    if report.passed:
        return True
    print(to_json({"validation": report.to_dict()}))
    for check in report.failures:
        print(f"validation failed: {check.name}: {check.message}", file=sys.stderr)
    return False


def cmd_validate(args: argparse.Namespace, ctx: RunContext) -> int:
    spec = ctx.require_spec()
    report = _validated(ctx, spec, samples=args.samples)
    ctx.emit("validation", report.to_dict())
    for check in report.failures:
        print(f"FAIL {check.name}: {check.message} witness={json.dumps(check.witness)}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_solve(args: argparse.Namespace, ctx: RunContext) -> int:
    spec = ctx.require_spec()
    if not _require_valid(ctx, spec):
        return EXIT_VALIDATION
    solution = _solve(ctx, spec)
    path = write_fields_csv(solution, ctx.out_dir / "fields.csv", ctx.config.output.float_digits)
    ctx.artifact("fields", path)
    summary = solution.report.to_dict()
    summary["initial_values"] = solution.initial_values()
    ctx.emit("sweep_report", summary)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, ctx: RunContext) -> int:
    spec = ctx.require_spec()
    sim = ctx.config.simulation
    for flag, index, controls in (("--leader-index", args.leader_index, spec.leader_controls),
                                  ("--follower-index", args.follower_index, spec.follower_controls)):
        if not 0 <= index < controls.size:
            raise ProblemConfigError([f"{flag} must be in [0, {controls.size}), got {index}"])
    leader = ConstantPolicy.at_index(spec.leader_controls, args.leader_index)
    follower = ConstantPolicy.at_index(spec.follower_controls, args.follower_index)
    with ctx.metrics.timed("simulate"):
        timer_id = ctx.run_logger.start_performance_timer("simulate")
        bundle = simulate(spec, leader, follower, sim.n_paths, sim.dt, ctx.seed, threads=ctx.threads)
        duration = ctx.run_logger.end_performance_timer(timer_id)
    ctx.metrics.increment("paths_simulated", bundle.n_paths)
    ctx.run_logger.log_simulation(bundle.n_paths, bundle.n_steps, bundle.dt, ctx.seed, ctx.threads, duration)
    digits = ctx.config.output.float_digits
    if ctx.config.output.dump_paths:
        ctx.artifact("paths", write_paths_csv(bundle, ctx.out_dir / "paths.csv", digits))

    players = {}
    for player in Player:
        costs = accumulate_cost(bundle, spec, player)
        with ctx.metrics.timed("solve_bsde"):
            result = evaluate_risk_value(spec, leader, follower, player, sim.n_paths, sim.dt, ctx.seed,
                                         ctx.basis, bundle=bundle)
        ctx.metrics.increment("regressions", bundle.n_steps)
        ctx.metrics.set_gauge(f"regression_error_{player.value}", result.solution.regression_error)
        ctx.run_logger.log_bsde_solve(player.value, result.y0, result.standard_error,
                                      result.solution.regression_error,
                                      result.solution.diagnostics_summary()["max_condition_number"])
        if ctx.config.output.dump_bsde:
            ctx.artifact(f"bsde_{player.value}",
                         write_bsde_csv(bundle, result.solution, ctx.out_dir / f"bsde_{player.value}.csv", digits))
        players[player.value] = {
            **result.to_dict(),
            "accumulated_cost_mean": float(costs.mean()),
            "accumulated_cost_std": float(costs.std(ddof=1)) if costs.size > 1 else 0.0,
        }
    ctx.emit("simulation", {
        "leader_policy": repr(leader),
        "follower_policy": repr(follower),
        "n_paths": bundle.n_paths,
        "n_steps": bundle.n_steps,
        "dt": bundle.dt,
        "seed": ctx.seed,
        "players": players,
    })
    return EXIT_OK


def cmd_riskcheck(args: argparse.Namespace, ctx: RunContext) -> int:
    if args.generator:
        generators = [Generator(GeneratorPreset(args.generator), args.kappa)]
    else:
        spec = ctx.require_spec()
        generators = []
        for gen in (spec.leader_generator, spec.follower_generator):
            if gen not in generators:
                generators.append(gen)
    seeds = list(range(ctx.seed, ctx.seed + args.trials))
    ctx.manifest.seeds = seeds
    suites = []
    for gen in generators:
        with ctx.metrics.timed("riskcheck"):
            suites.append(run_axiom_suite(gen, seeds, n_paths=ctx.config.simulation.n_paths,
                                          dt=ctx.config.simulation.dt, basis=ctx.basis))
    passed = all(suite.passed for suite in suites)
    ctx.emit("riskcheck", {"passed": passed, "suites": [suite.to_dict() for suite in suites]})
    return EXIT_OK if passed else EXIT_VALIDATION


def cmd_dpp(args: argparse.Namespace, ctx: RunContext) -> int:
    spec = ctx.require_spec()
    if not _require_valid(ctx, spec):
        return EXIT_VALIDATION
    solution = _solve(ctx, spec)
    r_steps = args.r_steps if args.r_steps is not None else solution.grid.n_t
    residuals = {}
    with ctx.metrics.timed("dpp"):
        for player in Player:
            residuals[player.value] = dpp_residual(spec, solution, player, r_steps, refine=args.refine,
                                                   threads=ctx.threads)
    ctx.emit("dpp", {"r_steps": r_steps, "refine": args.refine, "residuals": residuals,
                     "initial_values": solution.initial_values()})
    return EXIT_OK


def cmd_crossval(args: argparse.Namespace, ctx: RunContext) -> int:
    spec = ctx.require_spec()
    if not _require_valid(ctx, spec):
        return EXIT_VALIDATION
    solution = _solve(ctx, spec)
    sim = ctx.config.simulation
    with ctx.metrics.timed("crossval"):
        report = cross_validate(spec, solution, sim.n_paths, sim.dt, ctx.seed, ctx.basis, threads=ctx.threads)
    ctx.run_logger.log_cross_validation(
        (report.grid_value_1, report.grid_value_2), (report.mc_value_1, report.mc_value_2),
        (report.standard_error_1, report.standard_error_2), report.gaps)
    ctx.emit("crossval", report.to_dict())
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace, RunContext], int]] = {
    "validate": cmd_validate,
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "riskcheck": cmd_riskcheck,
    "dpp": cmd_dpp,
    "crossval": cmd_crossval,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("problem", nargs="?", help="Problem file (JSON)")
    common.add_argument("--builtin", choices=builtin_names(), help="Use a built-in problem instead of a file")
    common.add_argument("--config", help="Settings file (YAML or JSON)")
    common.add_argument("--seed", type=int, default=None, help="Master seed (default 42)")
    common.add_argument("--threads", type=int, default=None,
                        help="Worker threads (default: HRC_THREADS or the CPU count)")
    common.add_argument("--out-dir", default=None, help="Output directory for reports and tables")
    common.add_argument("--log-level", default=None, choices=[level.value for level in LogLevel],
                        type=str.upper)

    grid_flags = argparse.ArgumentParser(add_help=False)
    grid_flags.add_argument("--grid-nodes", type=int, default=None, help="Nodes per axis")
    steps = grid_flags.add_mutually_exclusive_group()
    steps.add_argument("--n-t", type=int, default=None, help="Grid time steps (default: from the CFL bound)")
    steps.add_argument("--grid-dt", type=float, default=None, help="Grid time step")

    mc_flags = argparse.ArgumentParser(add_help=False)
    mc_flags.add_argument("--paths", type=int, default=None, help="Monte-Carlo paths")
    mc_flags.add_argument("--dt", dest="mc_dt", type=float, default=None, help="Monte-Carlo time step")
    mc_flags.add_argument("--degree", type=int, default=None, help="Regression polynomial degree")

    parser = argparse.ArgumentParser(prog="hrc", description="Hierarchical risk-averse control toolkit")
    parser.add_argument("--version", action="version", version=f"hrc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    validate = sub.add_parser("validate", parents=[common], help="Check standing assumptions")
    validate.add_argument("--samples", type=int, default=4096)

    solve = sub.add_parser("solve", parents=[common, grid_flags], help="Solve the coupled HJB system")
    # --dt is the grid time step for solve
    solve.add_argument("--dt", dest="grid_dt", type=float, default=None, help=argparse.SUPPRESS)

    simulate_cmd = sub.add_parser("simulate", parents=[common, mc_flags],
                                  help="Simulate under constant policies and report risk values")
    simulate_cmd.add_argument("--leader-index", type=int, default=0)
    simulate_cmd.add_argument("--follower-index", type=int, default=0)
    simulate_cmd.add_argument("--dump-paths", action="store_true")
    simulate_cmd.add_argument("--dump-bsde", action="store_true")

    riskcheck = sub.add_parser("riskcheck", parents=[common, mc_flags], help="Risk-measure property suite")
    riskcheck.add_argument("--generator", choices=[p.value for p in GeneratorPreset], default=None)
    riskcheck.add_argument("--kappa", type=float, default=0.5)
    riskcheck.add_argument("--trials", type=int, default=10)

    dpp = sub.add_parser("dpp", parents=[common, grid_flags], help="Discrete DPP residuals")
    dpp.add_argument("--r-steps", type=int, default=None)
    dpp.add_argument("--refine", type=int, default=1)

    sub.add_parser("crossval", parents=[common, grid_flags, mc_flags], help="Grid vs Monte-Carlo values")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _resolve_config(args)
    except (ProblemConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT

    run_logger = RunLogger(config)
    out_dir = Path(config.output.out_dir)
    ctx = RunContext(
        command=args.command,
        config=config,
        run_logger=run_logger,
        metrics=MetricsCollector(),
        out_dir=out_dir,
        manifest=RunManifest(command=args.command, settings=config.to_dict(),
                             seeds=[config.simulation.seed]),
    )
    start = time.perf_counter()
    try:
        ctx.spec, source = _load_spec(args)
        if ctx.spec is not None:
            ctx.manifest.problem_digest = ctx.spec.digest
            ctx.manifest.problem_source = source
        out_dir.mkdir(parents=True, exist_ok=True)
        settings_path = out_dir / "settings.yml"
        config.save_to_file(settings_path)
        ctx.artifact("settings", settings_path)
        code = COMMANDS[args.command](args, ctx)
    except CflError as e:
        run_logger.log_failure(args.command, e, EXIT_NUMERICAL)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (PreconditionError, RegressionError) as e:
        run_logger.log_failure(args.command, e, EXIT_NUMERICAL)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ProblemConfigError as e:
        run_logger.log_failure(args.command, e, EXIT_INPUT)
        for issue in e.issues:
            print(f"error: {issue}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError) as e:
        run_logger.log_failure(args.command, e, EXIT_INPUT)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT

    ctx.manifest.metrics = ctx.metrics.summary()
    ctx.manifest.write(out_dir, time.perf_counter() - start)
    return code


if __name__ == "__main__":
    sys.exit(main())
