"""
Scenario Files and Result Writers

JSON scenario/inputs loading with provenance logging, trace and sweep CSV
writers, and JSON report output.
"""
import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterator, List, Tuple, Union

import structlog
from pydantic import BaseModel, ValidationError

from pursuit_sim.core.config import settings
from pursuit_sim.core.errors import ConfigError, OutputError
from pursuit_sim.schemas.scenario import Scenario, ScenarioMetadata, SweepAxis
from pursuit_sim.schemas.sweep import SweepCell, SweepResult
from pursuit_sim.schemas.theorem import TheoremFile, TheoremInputs
from pursuit_sim.services.engine import SimTrace
from pursuit_sim.utils.param_paths import apply_override, read_path

logger = structlog.get_logger()

BUNDLED_DIR = Path(__file__).resolve().parent.parent / "scenarios"

TRACE_HEADER = ["t", "agent_id", "role", "x", "y", "theta", "v", "w", "phase", "target_id"]
EVENTS_MARKER = "# events"
EVENTS_HEADER = ["t", "kind", "agent_ids"]
SWEEP_TAIL = ["min_distance", "captured", "t_d", "error"]

PathLike = Union[str, Path]


def _config_error(error: ValidationError, source: str) -> ConfigError:
    first = error.errors()[0]
    key = ".".join(str(part) for part in first["loc"]) or "<root>"
    details = "; ".join(
        f"{'.'.join(str(part) for part in err['loc']) or '<root>'}: {err['msg']}" for err in error.errors()
    )
    return ConfigError(f"{source}: {details}", key=key)


def load_document(path: PathLike) -> Dict[str, Any]:
    """
    Read a JSON document.

    Raises:
        ConfigError: if the file is unreadable or not a JSON object
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}", key=str(path)) from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}", key=str(path)) from e
    if not isinstance(document, dict):
        raise ConfigError(f"{path} must hold a JSON object", key=str(path))
    return document


def defaults_applied(model: BaseModel, prefix: str = "") -> Iterator[Tuple[str, Any]]:
    """(path, value) of every field the schema filled in rather than the file."""
    for name in type(model).model_fields:
        value = getattr(model, name)
        path = f"{prefix}{name}"
        if name not in model.model_fields_set:
            yield path, value.model_dump(mode="json") if isinstance(value, BaseModel) else value
        elif isinstance(value, BaseModel):
            yield from defaults_applied(value, path + ".")
        elif isinstance(value, list):
            for i, item in enumerate(value):
                if isinstance(item, BaseModel):
                    yield from defaults_applied(item, f"{path}.{i}.")


def check_caption(metadata: ScenarioMetadata, document: Dict[str, Any]) -> None:
    """
    Assert every caption value recorded in the metadata against the loaded document.

    Raises:
        ConfigError: on the first mismatch
    """
    for path, expected in metadata.caption.items():
        for actual in read_path(document, path):
            if actual is None or not math.isclose(float(actual), expected, rel_tol=1e-12, abs_tol=1e-12):
                raise ConfigError(f"caption value {path}={expected} does not match scenario value {actual}", key=path)


def parse_scenario(path: PathLike) -> Union[Scenario, TheoremInputs]:
    """
    Load and validate a scenario file, or a verification inputs file.

    A document with a top-level ``theorem1`` block is read as inputs for the
    condition checker, one with ``theorem2`` as inputs for the clearance ODE. Every schema-filled default is logged for provenance
    and caption values in the metadata are asserted.

    Args:
        path: JSON file

    Returns:
        Scenario, or Theorem1Inputs / Theorem2Inputs for an inputs file

    Raises:
        ConfigError: naming the offending key on any schema violation
    """
    document = load_document(path)
    model_cls = TheoremFile if "theorem1" in document or "theorem2" in document else Scenario
    try:
        model = model_cls.model_validate(document)
    except ValidationError as e:
        raise _config_error(e, str(path)) from e

    for key, value in defaults_applied(model):
        logger.info("scenario_default_applied", path=str(path), key=key, value=value)

    if isinstance(model, TheoremFile):
        check_caption(model.metadata, model.inputs.model_dump(mode="json"))
        logger.info("theorem_inputs_loaded", path=str(path), name=model.metadata.name)
        return model.inputs

    check_caption(model.metadata, model.model_dump(mode="json"))
    logger.info(
        "scenario_loaded",
        path=str(path),
        name=model.metadata.name,
        mode=model.mode.value,
        pursuers=model.n_pursuers,
        evaders=model.n_evaders,
    )
    return model


def resolve_path(name: PathLike) -> Path:
    """
    A path as given, or the bundled scenario of that name.

    ``fig1`` and ``fig1.json`` both resolve to the bundled file when no such
    file exists relative to the working directory.
    """
    path = Path(name)
    if path.exists():
        return path
    bundled = BUNDLED_DIR / (path.name if path.suffix == ".json" else f"{path.name}.json")
    return bundled if bundled.exists() else path


def with_overrides(scenario: Scenario, overrides: Dict[str, Any]) -> Scenario:
    """
    Revalidate a scenario with dotted-path overrides applied.

    Raises:
        ConfigError: if a path does not resolve or the result is invalid
    """
    if not overrides:
        return scenario
    data = scenario.model_dump(mode="json")
    for path, value in overrides.items():
        apply_override(data, path, value)
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        raise _config_error(e, scenario.metadata.name) from e


def serialize_scenario(scenario: Scenario) -> str:
    """JSON text that parses back to an equal scenario."""
    return json.dumps(scenario.model_dump(mode="json"), indent=2)


def _open_for_write(path: PathLike):
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        return open(target, "w", encoding="utf-8", newline="")
    except OSError as e:
        raise OutputError(f"cannot write {target}: {e}", path=str(target)) from e


def _fmt(value: float, digits: int) -> str:
    return f"{value:.{digits}g}"


def write_trace_csv(trace: SimTrace, path: PathLike) -> None:
    """
    Write trace rows, then an events section when there are events.

    Raises:
        OutputError: on I/O failure
    """
    digits = settings.float_digits
    try:
        with _open_for_write(path) as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(TRACE_HEADER)
            for r in trace.records:
                writer.writerow([
                    _fmt(r.t, digits),
                    r.agent_id,
                    r.role.value,
                    _fmt(r.x, digits),
                    _fmt(r.y, digits),
                    _fmt(r.theta, digits),
                    _fmt(r.v, digits),
                    _fmt(r.w, digits),
                    r.phase.value,
                    "" if r.target_id is None else r.target_id,
                ])
            if trace.events:
                f.write("\n" + EVENTS_MARKER + "\n")
                writer.writerow(EVENTS_HEADER)
                for ev in trace.events:
                    writer.writerow([_fmt(ev.t, digits), ev.kind.value, ";".join(str(i) for i in ev.agent_ids)])
    except OSError as e:
        raise OutputError(f"failed writing trace to {path}: {e}", path=str(path)) from e
    logger.info("trace_written", path=str(path), rows=len(trace.records), events=len(trace.events))


def trace_summary(trace: SimTrace) -> Dict[str, Any]:
    """JSON-ready summary of a run."""
    s = trace.summary
    return {
        "scenario": trace.scenario_name,
        "dt": trace.dt,
        "steps": s.steps,
        "t_final": s.t_final,
        "captured": {str(k): v for k, v in s.captured.items()},
        "capture_time": {str(k): v for k, v in s.capture_time.items()},
        "capture_order": list(s.capture_order),
        "min_distance": {f"{p}-{e}": d for (p, e), d in s.min_distance.items()},
        "events": [
            {"t": ev.t, "kind": ev.kind.value, "agent_ids": list(ev.agent_ids)} for ev in trace.events
        ],
    }


def write_sweep_csv(result: SweepResult, path: PathLike) -> None:
    """
    One row per cell: grid indices, axis values, min distance, capture flag, t_d, error.

    Floats are written with full round-trip precision.

    Raises:
        OutputError: on I/O failure
    """
    n_axes = len(result.axes)
    header = [f"i{k}" for k in range(n_axes)] + [axis.path for axis in result.axes] + SWEEP_TAIL
    try:
        with _open_for_write(path) as f:
            f.write(f"# eps2={result.eps2!r}\n")
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for cell in result.cells:
                writer.writerow(
                    list(cell.index)
                    + [repr(v) for v in cell.values]
                    + [
                        "" if cell.min_distance is None else repr(cell.min_distance),
                        "" if cell.captured is None else int(cell.captured),
                        "" if cell.t_d is None else repr(cell.t_d),
                        cell.error or "",
                    ]
                )
    except OSError as e:
        raise OutputError(f"failed writing sweep to {path}: {e}", path=str(path)) from e
    logger.info("sweep_written", path=str(path), cells=len(result.cells))


def read_sweep_csv(path: PathLike) -> SweepResult:
    """
    Read a sweep written by :func:`write_sweep_csv`.

    Raises:
        ConfigError: if the file is missing or malformed
    """
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            first = f.readline().strip()
            if not first.startswith("# eps2="):
                raise ConfigError(f"{path} is not a sweep file", key=str(path))
            eps2 = float(first[len("# eps2="):])
            rows = list(csv.reader(f))
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}", key=str(path)) from e

    header, body = rows[0], rows[1:]
    n_axes = (len(header) - len(SWEEP_TAIL)) // 2
    paths = header[n_axes:2 * n_axes]
    axis_values: List[Dict[int, float]] = [{} for _ in range(n_axes)]
    cells = []
    for row in body:
        index = [int(v) for v in row[:n_axes]]
        values = [float(v) for v in row[n_axes:2 * n_axes]]
        for k in range(n_axes):
            axis_values[k][index[k]] = values[k]
        min_distance, captured, t_d, error = row[2 * n_axes:]
        cells.append(SweepCell(
            index=index,
            values=values,
            min_distance=float(min_distance) if min_distance else None,
            captured=bool(int(captured)) if captured else None,
            t_d=float(t_d) if t_d else None,
            error=error or None,
        ))

    axes = [
        SweepAxis(path=p, values=[axis_values[k][i] for i in sorted(axis_values[k])])
        for k, p in enumerate(paths)
    ]
    return SweepResult(axes=axes, eps2=eps2, cells=cells)


def _jsonable(report: Any) -> Any:
    if isinstance(report, BaseModel):
        return report.model_dump(mode="json")
    if isinstance(report, (list, tuple)):
        return [_jsonable(item) for item in report]
    if isinstance(report, dict):
        return {str(k): _jsonable(v) for k, v in report.items()}
    return report


def write_report_json(report: Any, path: PathLike) -> None:
    """
    Write a report (pydantic model, list of models or plain dict) as JSON.

    Raises:
        OutputError: on I/O failure
    """
    try:
        with _open_for_write(path) as f:
            json.dump(_jsonable(report), f, indent=2)
            f.write("\n")
    except OSError as e:
        raise OutputError(f"failed writing report to {path}: {e}", path=str(path)) from e
    logger.info("report_written", path=str(path))


def read_trace_events(path: PathLike) -> List[Tuple[float, str, Tuple[int, ...]]]:
    """Events section of a trace CSV as (t, kind, agent ids)."""
    events = []
    in_events = False
    with open(path, "r", encoding="utf-8", newline="") as f:
        for line in f:
            line = line.rstrip("\n")
            if line == EVENTS_MARKER:
                in_events = True
                continue
            if not in_events or not line or line == ",".join(EVENTS_HEADER):
                continue
            t, kind, ids = line.split(",")
            events.append((float(t), kind, tuple(int(i) for i in ids.split(";") if i)))
    return events
