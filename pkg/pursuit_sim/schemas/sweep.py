"""
Pydantic schemas for parameter sweeps
"""
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from pursuit_sim.schemas.scenario import Scenario, SweepAxis
from pursuit_sim.utils import param_paths


class SweepGrid(BaseModel):
    """Up to two named axes over a base scenario"""
    axes: List[SweepAxis] = Field(..., min_length=1, max_length=2)
    base: Scenario
    overrides: Dict[str, Any] = Field(default_factory=dict, description="Applied to every cell before the axes")

    @model_validator(mode='after')
    def validate_axes(self):
        """Validate axis paths are distinct and resolve in the base scenario"""
        paths = [axis.path for axis in self.axes]
        if len(set(paths)) != len(paths):
            raise ValueError(f"duplicate sweep axis paths: {paths}")
        # ConfigError propagates unchanged with its key
        document = self.base.model_dump(mode="json")
        for path in [*paths, *self.overrides]:
            param_paths.read_path(document, path)
        return self

    @property
    def shape(self) -> tuple:
        return tuple(len(axis.values) for axis in self.axes)


class SweepCell(BaseModel):
    """One grid cell: axis values and the run summary"""
    index: List[int]
    values: List[float]
    min_distance: Optional[float] = None
    captured: Optional[bool] = None
    t_d: Optional[float] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


class SweepResult(BaseModel):
    """Grid of per-cell run summaries in grid order"""
    axes: List[SweepAxis]
    eps2: float
    cells: List[SweepCell]

    @property
    def failed(self) -> int:
        return sum(1 for cell in self.cells if not cell.ok)


class LadderPoint(BaseModel):
    """Capture rate of one grid at one ladder value"""
    value: float
    rate: float
    failed: int = 0


class LowestAlertReport(BaseModel):
    """Smallest escaping alert distance per initial distance, and their mean"""
    mean: Optional[float] = Field(None, description="Null when no initial distance has an escaping eps1")
    lowest: List[Tuple[float, float]] = Field(default_factory=list, description="(d0, lowest escaping eps1)")
    no_escape: List[float] = Field(default_factory=list, description="d0 values with no escaping eps1 on the grid")


class DispersionPoint(BaseModel):
    value: float
    dispersion: Optional[float] = None
    error: Optional[str] = None


class CaptureTimeRow(BaseModel):
    """Full-capture times of one pursuer count over all seeds"""
    n_pursuers: int
    t_d: List[float]
    mean_t_d: Optional[float] = None
    non_captures: int = 0
    kth_mean: List[Optional[float]] = Field(default_factory=list, description="Mean time to the k-th capture")


class CaptureTimeTable(BaseModel):
    seeds: List[int]
    t_f: float
    rows: List[CaptureTimeRow]
    spearman_rho: Optional[float] = None
