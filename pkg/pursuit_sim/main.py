"""
Command-line surface.

Run with: python -m pursuit_sim <command> ...

Every command prints one JSON summary on stdout; logs go to stderr. Exit code
0 on success, 1 on configuration errors, 2 on runtime failures.
"""
import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import structlog
from pydantic import ValidationError

from pursuit_sim.core.config import settings
from pursuit_sim.core.errors import ConfigError, PursuitSimError
from pursuit_sim.logging_config import configure_structlog, log_run
from pursuit_sim.schemas.scenario import Scenario
from pursuit_sim.schemas.sweep import SweepGrid
from pursuit_sim.schemas.theorem import Theorem1Inputs, Theorem2Inputs
from pursuit_sim.services import analysis, engine, verify
from pursuit_sim.services.scenario_io import (
    parse_scenario,
    read_sweep_csv,
    resolve_path,
    trace_summary,
    with_overrides,
    write_report_json,
    write_sweep_csv,
    write_trace_csv,
)

logger = structlog.get_logger()


EXPECTED_BLOCK = {
    Theorem1Inputs: ("capture-condition inputs", "theorem1"),
    Theorem2Inputs: ("clearance ODE inputs", "theorem2"),
    Scenario: ("a scenario", "agents"),
}


def _load(name: str, expect: type) -> Any:
    loaded = parse_scenario(resolve_path(name))
    if not isinstance(loaded, expect):
        kind, key = EXPECTED_BLOCK[expect]
        raise ConfigError(f"{name} does not hold {kind}", key=key)
    return loaded


def _out_dir(args: argparse.Namespace, scenario: Optional[Scenario] = None) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    if scenario is not None and scenario.output.directory:
        return Path(scenario.output.directory)
    name = scenario.metadata.name if scenario is not None else "verify"
    return Path(settings.output_dir) / name


def _emit(summary: Dict[str, Any]) -> None:
    json.dump(summary, sys.stdout, indent=2, allow_nan=False, default=str)
    sys.stdout.write("\n")


def _finite(value: Optional[float]) -> Optional[float]:
    return value if value is not None and math.isfinite(value) else None


def cmd_run(args: argparse.Namespace) -> Dict[str, Any]:
    scenario = _load(args.scenario, Scenario)
    overrides: Dict[str, Any] = {}
    if args.dt is not None:
        overrides["integration.dt"] = args.dt
    if args.seed is not None:
        overrides["seed"] = args.seed
        if scenario.random_layout is not None:
            overrides["random_layout.seed"] = args.seed
    scenario = with_overrides(scenario, overrides)

    trace = engine.run(scenario)
    out = _out_dir(args, scenario)
    summary = trace_summary(trace)
    files = {}
    if scenario.output.trace_csv:
        files["trace"] = str(out / "trace.csv")
        write_trace_csv(trace, files["trace"])
    if scenario.output.summary_json:
        files["summary"] = str(out / "summary.json")
        write_report_json(summary, files["summary"])
    return {"command": "run", **summary, "files": files}


def cmd_sweep(args: argparse.Namespace) -> Dict[str, Any]:
    scenario = _load(args.scenario, Scenario)
    if scenario.sweep is None:
        raise ConfigError(f"{args.scenario} has no sweep block", key="sweep")

    grid = SweepGrid(axes=scenario.sweep.axes, base=scenario)
    out = _out_dir(args, scenario)
    rungs: List[Dict[str, Any]] = []
    ladder = scenario.sweep.ladder
    for value in (ladder.values if ladder is not None else [None]):
        rung = grid if value is None else grid.model_copy(update={"overrides": {ladder.path: value}})
        result = analysis.run_sweep(rung, args.jobs)
        name = "sweep.csv" if value is None else f"sweep_{len(rungs):02d}.csv"
        write_sweep_csv(result, out / name)
        ok = result.failed < len(result.cells)
        rungs.append({
            "ladder_value": value,
            "file": str(out / name),
            "cells": len(result.cells),
            "failed": result.failed,
            "capture_rate": analysis.capture_rate(result) if ok else None,
        })

    return {
        "command": "sweep",
        "scenario": scenario.metadata.name,
        "axes": [axis.path for axis in grid.axes],
        "ladder": ladder.path if ladder is not None else None,
        "results": rungs,
    }


def cmd_verify_theorem1(args: argparse.Namespace) -> Dict[str, Any]:
    inputs = _load(args.inputs, Theorem1Inputs)
    report = verify.theorem1_check(inputs)
    out = _out_dir(args)
    path = out / "theorem1.json"
    write_report_json(report, path)
    return {"command": "verify theorem1", "report": report.model_dump(mode="json"), "file": str(path)}


def cmd_verify_theorem2(args: argparse.Namespace) -> Dict[str, Any]:
    inputs = _load(args.inputs, Theorem2Inputs)
    flags = {"q0": args.q0, "d_des": args.d_des, "t_end": args.t_end, "dt": args.dt}
    given = {key: value for key, value in flags.items() if value is not None}
    if given:
        inputs = Theorem2Inputs.model_validate({**inputs.model_dump(), **given})
    result = verify.theorem2_reduced_ode(inputs.q0, inputs.d_des, inputs.t_end, inputs.dt)
    report = {
        "q0": list(inputs.q0),
        "d_des": inputs.d_des,
        "t_end": inputs.t_end,
        "dt": inputs.dt,
        "final_norm": result.final_norm,
        "final_error": abs(result.final_norm - inputs.d_des),
        "lyapunov_monotone": result.lyapunov_monotone(),
    }
    path = _out_dir(args) / "theorem2.json"
    write_report_json(report, path)
    return {"command": "verify theorem2", "report": report, "file": str(path)}


def _axis_values(scenario: Scenario, path: str, given: Optional[List[float]]) -> List[float]:
    if given:
        return given
    if scenario.sweep is not None:
        for axis in scenario.sweep.axes:
            if axis.path == path:
                return axis.values
    raise ConfigError(f"no values given for {path} and the scenario sweep block has none", key=path)


def cmd_analyze_dispersion(args: argparse.Namespace) -> Dict[str, Any]:
    scenario = _load(args.scenario, Scenario)
    values = args.values or _axis_values(scenario, args.path, None)
    points = analysis.dispersion_study(scenario, values, args.path, args.jobs)
    path = _out_dir(args, scenario) / "dispersion.json"
    write_report_json(points, path)
    return {"command": "analyze dispersion", "path": args.path, "points": [p.model_dump() for p in points], "file": str(path)}


def cmd_analyze_rates(args: argparse.Namespace) -> Dict[str, Any]:
    scenario = _load(args.scenario, Scenario)
    if scenario.sweep is None:
        raise ConfigError(f"{args.scenario} has no sweep block", key="sweep")

    grid = SweepGrid(axes=scenario.sweep.axes, base=scenario)
    out = _out_dir(args, scenario)
    if scenario.sweep.ladder is None:
        result = analysis.run_sweep(grid, args.jobs)
        report: Any = {"rate": analysis.capture_rate(result), "failed": result.failed}
    else:
        report = analysis.capture_rate_ladder(grid, scenario.sweep.ladder, args.jobs)
    path = out / "rates.json"
    write_report_json(report, path)
    body = report if isinstance(report, dict) else [p.model_dump() for p in report]
    return {"command": "analyze rates", "rates": body, "file": str(path)}


def cmd_analyze_lowest_eps1(args: argparse.Namespace) -> Dict[str, Any]:
    scenario = _load(args.scenario, Scenario)
    eps1 = _axis_values(scenario, "engagement.eps1", args.eps1)
    d0 = _axis_values(scenario, "layout.d0", args.d0)
    report = analysis.lowest_alert_distance(eps1, d0, scenario, args.jobs)
    path = _out_dir(args, scenario) / "lowest_eps1.json"
    write_report_json(report, path)
    return {"command": "analyze lowest-eps1", "report": report.model_dump(), "file": str(path)}


def cmd_analyze_capture_time(args: argparse.Namespace) -> Dict[str, Any]:
    scenario = _load(args.scenario, Scenario)
    counts = args.pursuers or list(range(1, 9))
    table = analysis.capture_time_study(counts, args.seeds, scenario, args.jobs)
    path = _out_dir(args, scenario) / "capture_time.json"
    write_report_json(table, path)
    return {
        "command": "analyze capture-time",
        "mean_t_d": {str(row.n_pursuers): row.mean_t_d for row in table.rows},
        "non_captures": {str(row.n_pursuers): row.non_captures for row in table.rows},
        "spearman_rho": table.spearman_rho,
        "file": str(path),
    }


def cmd_analyze_target_switch(args: argparse.Namespace) -> Dict[str, Any]:
    scenario = _load(args.scenario, Scenario)
    delta = _axis_values(scenario, "targeting.delta_t_bar", args.delta_t_bar)
    pts = _axis_values(scenario, "targeting.pt", args.pt)
    result = analysis.target_switch_study(scenario, delta, pts, args.jobs)
    path = _out_dir(args, scenario) / "target_switch.csv"
    write_sweep_csv(result, path)
    return {
        "command": "analyze target-switch",
        "captured": [
            {"delta_t_bar": c.values[0], "pt": c.values[1], "captured": c.captured, "t_d": _finite(c.t_d)}
            for c in result.cells
        ],
        "file": str(path),
    }


def cmd_show_sweep(args: argparse.Namespace) -> Dict[str, Any]:
    result = read_sweep_csv(args.csv)
    return {
        "command": "show-sweep",
        "axes": [axis.path for axis in result.axes],
        "eps2": result.eps2,
        "cells": len(result.cells),
        "failed": result.failed,
        "capture_rate": analysis.capture_rate(result),
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pursuit_sim", description="Alert-Turn pursuit-evasion simulator")
    parser.add_argument("--log-level", default=None, help="override PURSUIT_SIM_LOG_LEVEL")
    parser.add_argument("--console-logs", action="store_true", help="human-readable logs instead of JSON")
    commands = parser.add_subparsers(dest="command", required=True)

    def add_common(sub: argparse.ArgumentParser, jobs: bool = False) -> None:
        sub.add_argument("--out", default=None, help="output directory")
        if jobs:
            sub.add_argument("--jobs", type=int, default=None, help="worker count (default PURSUIT_SIM_THREADS)")

    run = commands.add_parser("run", help="simulate one scenario")
    run.add_argument("scenario")
    run.add_argument("--dt", type=float, default=None, help="step size override")
    run.add_argument("--seed", type=int, default=None, help="seed override")
    add_common(run)
    run.set_defaults(handler=cmd_run)

    sweep = commands.add_parser("sweep", help="run the scenario's sweep block")
    sweep.add_argument("scenario")
    add_common(sweep, jobs=True)
    sweep.set_defaults(handler=cmd_sweep)

    show = commands.add_parser("show-sweep", help="summarize a sweep CSV")
    show.add_argument("csv")
    show.set_defaults(handler=cmd_show_sweep)

    verify_cmd = commands.add_parser("verify", help="capture-condition and aggregation checks")
    checks = verify_cmd.add_subparsers(dest="check", required=True)
    t1 = checks.add_parser("theorem1", help="evaluate the capture conditions")
    t1.add_argument("inputs")
    add_common(t1)
    t1.set_defaults(handler=cmd_verify_theorem1)
    t2 = checks.add_parser("theorem2", help="integrate the reduced clearance ODE")
    t2.add_argument("inputs")
    t2.add_argument("--q0", type=float, nargs=2, metavar=("QX", "QY"), help="override the file's start point")
    t2.add_argument("--d-des", type=float)
    t2.add_argument("--t-end", type=float)
    t2.add_argument("--dt", type=float)
    add_common(t2)
    t2.set_defaults(handler=cmd_verify_theorem2)

    analyze = commands.add_parser("analyze", help="statistics over many runs")
    studies = analyze.add_subparsers(dest="study", required=True)

    dispersion = studies.add_parser("dispersion", help="dispersion degree per parameter value")
    dispersion.add_argument("scenario")
    dispersion.add_argument("--path", default="multi.alpha")
    dispersion.add_argument("--values", type=float, nargs="+", default=None)
    add_common(dispersion, jobs=True)
    dispersion.set_defaults(handler=cmd_analyze_dispersion)

    rates = studies.add_parser("rates", help="capture rate of the sweep grid, per ladder value")
    rates.add_argument("scenario")
    add_common(rates, jobs=True)
    rates.set_defaults(handler=cmd_analyze_rates)

    lowest = studies.add_parser("lowest-eps1", help="mean lowest escaping alert distance")
    lowest.add_argument("scenario")
    lowest.add_argument("--eps1", type=float, nargs="+", default=None)
    lowest.add_argument("--d0", type=float, nargs="+", default=None)
    add_common(lowest, jobs=True)
    lowest.set_defaults(handler=cmd_analyze_lowest_eps1)

    capture_time = studies.add_parser("capture-time", help="capture time against pursuer count")
    capture_time.add_argument("scenario")
    capture_time.add_argument("--pursuers", type=int, nargs="+", default=None)
    capture_time.add_argument("--seeds", type=int, default=30)
    add_common(capture_time, jobs=True)
    capture_time.set_defaults(handler=cmd_analyze_capture_time)

    switch = studies.add_parser("target-switch", help="capture over detection interval x switch threshold")
    switch.add_argument("scenario")
    switch.add_argument("--delta-t-bar", type=float, nargs="+", default=None)
    switch.add_argument("--pt", type=float, nargs="+", default=None)
    add_common(switch, jobs=True)
    switch.set_defaults(handler=cmd_analyze_target_switch)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, dispatch, print the summary.

    Returns:
        Process exit code
    """
    args = build_parser().parse_args(argv)
    configure_structlog(args.log_level, json_output=False if args.console_logs else None)

    name = " ".join(part for part in (args.command, getattr(args, "check", None), getattr(args, "study", None)) if part)
    logger.debug("cli_dispatch", command=name, argv=list(argv) if argv is not None else sys.argv[1:])
    try:
        with log_run(name):
            summary = args.handler(args)
    except ValidationError as e:
        first = e.errors()[0]
        key = ".".join(str(part) for part in first["loc"])
        _emit({"command": name, "error": first["msg"], "key": key, "exit_code": ConfigError.exit_code})
        return ConfigError.exit_code
    except ConfigError as e:
        _emit({"command": name, "error": str(e), "key": e.key, "exit_code": e.exit_code})
        return e.exit_code
    except PursuitSimError as e:
        _emit({
            "command": name,
            "error": str(e),
            "error_type": type(e).__name__,
            "diagnostics": getattr(e, "diagnostics", None),
            "exit_code": e.exit_code,
        })
        return e.exit_code

    _emit(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
