"""
Experiment Analysis

Parameter sweeps over scenarios and the statistics computed from them:
capture rates, lowest escaping alert distance, dispersion degree and
capture time against pursuer count.
"""
import copy
import itertools
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from joblib import Parallel, delayed
from pydantic import ValidationError
from scipy.stats import spearmanr

from pursuit_sim.core.config import settings
from pursuit_sim.core.errors import ConfigError, DomainError, PursuitSimError
from pursuit_sim.models import EventKind, ModeEnum, Role
from pursuit_sim.schemas.scenario import Scenario, SweepAxis
from pursuit_sim.schemas.sweep import (
    CaptureTimeRow,
    CaptureTimeTable,
    DispersionPoint,
    LadderPoint,
    LowestAlertReport,
    SweepCell,
    SweepGrid,
    SweepResult,
)
from pursuit_sim.services.engine import SimTrace, run
from pursuit_sim.utils.param_paths import apply_override

logger = structlog.get_logger()


def _describe(error: Exception) -> str:
    if isinstance(error, ValidationError):
        return "; ".join(
            f"{'.'.join(str(part) for part in err['loc']) or '<root>'}: {err['msg']}"
            for err in error.errors()
        )
    return f"{type(error).__name__}: {error}"


def _build(data: Dict[str, Any], overrides: Sequence[Tuple[str, Any]]) -> Scenario:
    cell_data = copy.deepcopy(data)
    for path, value in overrides:
        apply_override(cell_data, path, value)
    return Scenario.model_validate(cell_data)


def summarize_run(scenario: Scenario, trace: SimTrace) -> Tuple[float, bool, float]:
    """
    Reduce a run to (min distance, captured, t_d).

    Captured means the required number of evaders was caught; t_d is the time of
    the last required capture, or t_f otherwise.
    """
    summary = trace.summary
    n_targets = scenario.targeting.n_targets or scenario.n_evaders
    captured = len(summary.capture_order) >= n_targets
    t_d = summary.capture_order[n_targets - 1] if captured else scenario.integration.t_f
    return min(summary.min_distance.values()), captured, t_d


def _run_cell(data: Dict[str, Any], paths: List[str], index: List[int], values: List[float]) -> SweepCell:
    try:
        scenario = _build(data, list(zip(paths, values)))
        trace = run(scenario, record_trace=False)
    except (PursuitSimError, ValidationError) as e:
        logger.warning("sweep_cell_failed", index=index, values=values, error=str(e))
        return SweepCell(index=index, values=values, error=_describe(e))

    min_distance, captured, t_d = summarize_run(scenario, trace)
    return SweepCell(index=index, values=values, min_distance=min_distance, captured=captured, t_d=t_d)


def run_sweep(grid: SweepGrid, n_jobs: Optional[int] = None) -> SweepResult:
    """
    Run one simulation per grid cell.

    Cells are independent; results come back in grid order whatever the
    worker count. A failing cell is recorded with its error and the sweep
    continues.

    Args:
        grid: Axes, base scenario and fixed overrides
        n_jobs: Worker count (defaults to settings.threads)

    Returns:
        SweepResult in row-major grid order
    """
    data = grid.base.model_dump(mode="json")
    for path, value in grid.overrides.items():
        apply_override(data, path, value)

    paths = [axis.path for axis in grid.axes]
    indices = list(itertools.product(*(range(len(axis.values)) for axis in grid.axes)))
    n_jobs = settings.threads if n_jobs is None else n_jobs

    logger.info("sweep_started", scenario=grid.base.metadata.name, axes=paths, cells=len(indices), n_jobs=n_jobs)
    cells = Parallel(n_jobs=n_jobs)(
        delayed(_run_cell)(data, paths, list(idx), [grid.axes[k].values[i] for k, i in enumerate(idx)])
        for idx in indices
    )
    result = SweepResult(axes=grid.axes, eps2=grid.base.engagement.eps2, cells=cells)
    logger.info("sweep_completed", scenario=grid.base.metadata.name, cells=len(cells), failed=result.failed)
    return result


def capture_rate(result: SweepResult) -> float:
    """
    Fraction of successful cells that ended in capture.

    Raises:
        DomainError: if no cell ran successfully
    """
    ok = [cell for cell in result.cells if cell.ok]
    if result.failed:
        logger.warning("capture_rate_excluded_cells", failed=result.failed, total=len(result.cells))
    if not ok:
        raise DomainError("capture rate undefined: no cell ran successfully")
    return sum(1 for cell in ok if cell.captured) / len(ok)


def capture_rate_ladder(grid: SweepGrid, ladder: SweepAxis, n_jobs: Optional[int] = None) -> List[LadderPoint]:
    """Capture rate of the same grid at every value of an outer parameter."""
    points = []
    for value in ladder.values:
        rung = grid.model_copy(update={"overrides": {**grid.overrides, ladder.path: value}})
        result = run_sweep(rung, n_jobs)
        points.append(LadderPoint(value=value, rate=capture_rate(result), failed=result.failed))
    return points


def lowest_alert_distance(
    eps1_grid: Sequence[float],
    d0_set: Sequence[float],
    base: Scenario,
    n_jobs: Optional[int] = None,
) -> LowestAlertReport:
    """
    Mean over initial distances of the smallest grid eps1 that lets the evader escape.

    Initial distances with no escaping eps1 are listed separately and left out of
    the mean.

    Raises:
        DomainError: if either grid is empty or eps1_grid is not ascending
    """
    if not eps1_grid or not d0_set:
        raise DomainError("lowest alert distance needs a non-empty eps1 grid and d0 set")
    if list(eps1_grid) != sorted(eps1_grid):
        raise DomainError("eps1 grid must be sorted ascending")

    grid = SweepGrid(
        axes=[SweepAxis(path="layout.d0", values=list(d0_set)), SweepAxis(path="engagement.eps1", values=list(eps1_grid))],
        base=base,
    )
    result = run_sweep(grid, n_jobs)
    by_index = {tuple(cell.index): cell for cell in result.cells}

    report = LowestAlertReport()
    for i, d0 in enumerate(d0_set):
        escaping = [
            eps1 for j, eps1 in enumerate(eps1_grid)
            if by_index[(i, j)].ok and not by_index[(i, j)].captured
        ]
        if escaping:
            report.lowest.append((d0, escaping[0]))
        else:
            report.no_escape.append(d0)

    if report.lowest:
        report.mean = float(np.mean([eps1 for _, eps1 in report.lowest]))
    return report


def _spread(points: np.ndarray) -> float:
    return float(np.linalg.norm(points - points.mean(axis=0), axis=1).sum())


def dispersion_degree(trace: SimTrace) -> float:
    """
    Relative growth of the summed evader distances to their centroid.

    Compares the first recorded step with the last step up to the first
    capture, since captured evaders stay frozen from then on.

    Raises:
        DomainError: with fewer than two evaders or an initially coincident group
    """
    rows = [r for r in trace.records if r.role == Role.EVADER]
    if not rows:
        raise DomainError("trace has no recorded evader rows")
    captures = trace.events_of(EventKind.CAPTURED)
    cutoff = min(ev.t for ev in captures) if captures else math.inf
    t0 = rows[0].t
    t_end = max(r.t for r in rows if r.t <= cutoff)
    start = np.array([(r.x, r.y) for r in rows if r.t == t0])
    end = np.array([(r.x, r.y) for r in rows if r.t == t_end])
    if len(start) < 2:
        raise DomainError("dispersion degree needs at least two evaders")

    initial = _spread(start)
    if initial == 0.0:
        raise DomainError("dispersion degree undefined: evaders start coincident")
    return (_spread(end) - initial) / initial


def _dispersion_job(data: Dict[str, Any], path: str, value: float) -> DispersionPoint:
    try:
        scenario = _build(data, [(path, value)])
        return DispersionPoint(value=value, dispersion=dispersion_degree(run(scenario)))
    except (PursuitSimError, ValidationError) as e:
        logger.warning("dispersion_run_failed", value=value, error=str(e))
        return DispersionPoint(value=value, error=_describe(e))


def dispersion_study(
    base: Scenario,
    values: Sequence[float],
    path: str = "multi.alpha",
    n_jobs: Optional[int] = None,
) -> List[DispersionPoint]:
    """Dispersion degree of one run per value of a parameter (the selfish weight by default)."""
    data = base.model_dump(mode="json")
    n_jobs = settings.threads if n_jobs is None else n_jobs
    return Parallel(n_jobs=n_jobs)(delayed(_dispersion_job)(data, path, value) for value in values)


def study_seeds(base_seed: int, n_seeds: int) -> List[int]:
    """Deterministic per-run seeds spawned from the scenario seed."""
    return [int(s) for s in np.random.SeedSequence(base_seed).generate_state(n_seeds)]


def _with_pursuer_count(data: Dict[str, Any], n_pursuers: int, seed: int) -> Dict[str, Any]:
    cell = copy.deepcopy(data)
    first = next(agent for agent in cell["agents"] if agent["role"] == Role.PURSUER.value)
    first["count"] = n_pursuers
    cell["agents"] = [a for a in cell["agents"] if a["role"] != Role.PURSUER.value or a is first]
    cell["random_layout"]["seed"] = seed
    return cell


def _capture_times_job(data: Dict[str, Any], n_pursuers: int, seed: int) -> Tuple[List[float], int]:
    scenario = Scenario.model_validate(_with_pursuer_count(data, n_pursuers, seed))
    trace = run(scenario, record_trace=False)
    n_targets = scenario.targeting.n_targets or scenario.n_evaders
    times = trace.summary.capture_order[:n_targets]
    return times + [scenario.integration.t_f] * (n_targets - len(times)), len(times)


def capture_time_study(
    n_p_range: Sequence[int],
    n_seeds: int,
    base: Scenario,
    n_jobs: Optional[int] = None,
) -> CaptureTimeTable:
    """
    Full-capture time against the number of pursuers over a fixed seed list.

    Every (pursuer count, seed) pair is one run on the base scenario's random
    layout. Runs that miss a capture contribute the t_f sentinel to ``t_d`` but
    are left out of the means.

    Raises:
        ConfigError: if the base scenario is not a randomized multi scenario
    """
    if base.mode != ModeEnum.MULTI or base.random_layout is None:
        raise ConfigError("capture-time study needs a multi scenario with random_layout", key="random_layout")
    if any(n < 1 for n in n_p_range):
        raise ConfigError("pursuer counts must be at least 1", key="n_p_range")

    seeds = study_seeds(base.seed, n_seeds)
    data = base.model_dump(mode="json")
    jobs = [(n_p, seed) for n_p in n_p_range for seed in seeds]
    n_jobs = settings.threads if n_jobs is None else n_jobs

    logger.info("capture_time_study_started", pursuer_counts=list(n_p_range), seeds=n_seeds, runs=len(jobs))
    outcomes = Parallel(n_jobs=n_jobs)(delayed(_capture_times_job)(data, n_p, seed) for n_p, seed in jobs)

    rows = []
    for k, n_p in enumerate(n_p_range):
        chunk = outcomes[k * n_seeds:(k + 1) * n_seeds]
        n_targets = len(chunk[0][0]) if chunk else 0
        full = [times[-1] for times, caught in chunk if caught == n_targets]
        kth_mean = []
        for j in range(n_targets):
            reached = [times[j] for times, caught in chunk if caught > j]
            kth_mean.append(float(np.mean(reached)) if reached else None)
        rows.append(CaptureTimeRow(
            n_pursuers=n_p,
            t_d=[times[-1] for times, _ in chunk],
            mean_t_d=float(np.mean(full)) if full else None,
            non_captures=len(chunk) - len(full),
            kth_mean=kth_mean,
        ))

    table = CaptureTimeTable(seeds=seeds, t_f=base.integration.t_f, rows=rows)
    valid = [(row.n_pursuers, row.mean_t_d) for row in rows if row.mean_t_d is not None]
    if len(valid) >= 2:
        rho, _ = spearmanr([n for n, _ in valid], [m for _, m in valid])
        table.spearman_rho = None if np.isnan(rho) else float(rho)

    logger.info("capture_time_study_completed", spearman_rho=table.spearman_rho)
    return table


def target_switch_study(
    base: Scenario,
    delta_t_bars: Sequence[float],
    pts: Sequence[float],
    n_jobs: Optional[int] = None,
) -> SweepResult:
    """Capture outcome over a detection-interval x switch-threshold grid."""
    grid = SweepGrid(
        axes=[
            SweepAxis(path="targeting.delta_t_bar", values=list(delta_t_bars)),
            SweepAxis(path="targeting.pt", values=list(pts)),
        ],
        base=base,
    )
    return run_sweep(grid, n_jobs)
