"""
Pydantic schemas for scenario files
"""
import math
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from pursuit_sim.core.config import settings
from pursuit_sim.models import (
    IntegratorEnum,
    ModeEnum,
    PostCaptureBehavior,
    Role,
    SelectionRule,
)
from pursuit_sim.schemas.agent import AgentParams, AgentState, InitialPose, make_state
from pursuit_sim.utils.core_math import MathConfig, wrap_angle

STRICT = {"extra": "forbid", "allow_inf_nan": False}


class EngagementConfig(BaseModel):
    """Alert distance, capture radius and pursuer alignment threshold"""
    model_config = {**STRICT, "frozen": True}

    eps1: float = Field(..., gt=0, description="Alert distance (m)")
    eps2: float = Field(..., gt=0, description="Capture radius (m)")
    bar_theta: float = Field(0.1, gt=0, description="Pursuer alignment threshold (rad)")
    align_hysteresis: float = Field(0.02, ge=0, description="Hysteresis band around bar_theta (rad)")

    @model_validator(mode='after')
    def validate_radii(self):
        """Validate capture radius lies strictly inside the alert distance"""
        if self.eps2 >= self.eps1:
            raise ValueError(f"eps2 ({self.eps2}) must be less than eps1 ({self.eps1})")
        return self


class MultiConfig(BaseModel):
    """Group-level constants of the multi-robot strategies"""
    model_config = {**STRICT, "frozen": True}

    alpha: float = Field(0.0, ge=0, le=1, description="Selfish parameter")
    k_beta: float = Field(0.5, ge=0, description="Decay gain of the isolated-evader blend (1/m)")
    m_rep: float = Field(0.1, ge=0, description="Pursuer repulsion gain")
    d_safe: float = Field(0.8, gt=0, description="Pursuer repulsion range (m)")
    d_des_update_period: Optional[float] = Field(None, gt=0, description="Refresh period of d_des (s); null = never")
    iso_threshold: Optional[float] = Field(None, gt=0, description="Isolation distance (m); null = 2*mean(d_des)")


class TargetingConfig(BaseModel):
    """Target detection and switching constants"""
    model_config = {**STRICT, "frozen": True}

    delta_t_bar: Optional[float] = Field(None, ge=0, description="Detection interval (s); null = infinite")
    pt: float = Field(0.2, gt=0, description="Switch threshold")
    n_targets: Optional[int] = Field(None, ge=1, description="Number of evaders to capture; null = all")
    selection_rule: SelectionRule = SelectionRule.SHORTEST_PREDICTED_TIME
    post_capture_behavior: PostCaptureBehavior = PostCaptureBehavior.RETARGET

    @property
    def interval(self) -> float:
        return math.inf if self.delta_t_bar is None else self.delta_t_bar


class IntegrationConfig(BaseModel):
    """Step size, horizon and integration scheme"""
    model_config = {**STRICT, "frozen": True}

    dt: float = Field(default_factory=lambda: settings.default_dt, gt=0)
    t_f: float = Field(..., gt=0, description="Terminal time of simulation (s)")
    integrator: IntegratorEnum = IntegratorEnum.EULER
    gamma: float = Field(default_factory=lambda: settings.default_gamma, gt=0, lt=1)

    @model_validator(mode='after')
    def validate_horizon(self):
        """Validate the horizon spans more than one step"""
        if self.t_f <= self.dt:
            raise ValueError(f"t_f ({self.t_f}) must exceed dt ({self.dt})")
        return self

    @property
    def math_config(self) -> MathConfig:
        return MathConfig(gamma=self.gamma)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_f / self.dt))


class AgentSpec(BaseModel):
    """One agent block (replicated `count` times when a random layout places them)"""
    model_config = STRICT

    role: Role
    params: AgentParams
    initial: Optional[InitialPose] = None
    count: int = Field(1, ge=1)


class PairLayout(BaseModel):
    """Pursuer at the origin heading +x, evader at (d0, 0) heading -dtheta0"""
    model_config = STRICT

    d0: float = Field(..., gt=0, description="Initial distance (m)")
    dtheta0: float = Field(0.0, description="theta_p(t0) - theta_e(t0) (rad)")
    v_p0: float = Field(0.0, ge=0)
    v_e0: float = Field(0.0, ge=0)


class RandomLayout(BaseModel):
    """Uniform placement in boxes given as [xmin, xmax, ymin, ymax]"""
    model_config = STRICT

    evader_box: Tuple[float, float, float, float]
    pursuer_box: Tuple[float, float, float, float]
    seed: int = 0

    @field_validator('evader_box', 'pursuer_box')
    @classmethod
    def validate_box(cls, v):
        if v[0] >= v[1] or v[2] >= v[3]:
            raise ValueError("box must be [xmin, xmax, ymin, ymax] with min < max")
        return v


class SweepAxis(BaseModel):
    """One named parameter path and the values it takes"""
    model_config = STRICT

    path: str = Field(..., min_length=1)
    values: List[float] = Field(..., min_length=1)


class SweepBlock(BaseModel):
    """Grid axes plus an optional outer ladder (one grid per ladder value)"""
    model_config = STRICT

    axes: List[SweepAxis] = Field(..., min_length=1, max_length=2)
    ladder: Optional[SweepAxis] = None


class OutputBlock(BaseModel):
    model_config = STRICT

    directory: Optional[str] = None
    trace_csv: bool = True
    summary_json: bool = True


class ScenarioMetadata(BaseModel):
    model_config = STRICT

    name: str = Field(..., min_length=1)
    description: str = ""
    figure: Optional[str] = None
    provenance: str = "repo-defined"
    caption: Dict[str, float] = Field(default_factory=dict, description="Caption values, asserted on load")


class Scenario(BaseModel):
    """Full experiment description"""
    model_config = STRICT

    metadata: ScenarioMetadata
    mode: ModeEnum = ModeEnum.SINGLE
    agents: List[AgentSpec] = Field(..., min_length=2)
    engagement: EngagementConfig
    multi: MultiConfig = Field(default_factory=MultiConfig)
    targeting: TargetingConfig = Field(default_factory=TargetingConfig)
    integration: IntegrationConfig
    layout: Optional[PairLayout] = None
    random_layout: Optional[RandomLayout] = None
    sweep: Optional[SweepBlock] = None
    output: OutputBlock = Field(default_factory=OutputBlock)
    seed: int = 0

    @model_validator(mode='after')
    def validate_agents(self):
        """Validate roster, layouts and mode are consistent"""
        n_pursuers = sum(a.count for a in self.agents if a.role == Role.PURSUER)
        n_evaders = sum(a.count for a in self.agents if a.role == Role.EVADER)
        if n_pursuers < 1 or n_evaders < 1:
            raise ValueError("scenario needs at least one pursuer and one evader")
        if self.mode == ModeEnum.SINGLE and (n_pursuers != 1 or n_evaders != 1):
            raise ValueError("single mode takes exactly one pursuer and one evader")
        if self.layout is not None and self.random_layout is not None:
            raise ValueError("layout and random_layout are mutually exclusive")
        if self.layout is not None and (n_pursuers != 1 or n_evaders != 1):
            raise ValueError("layout places exactly one pursuer and one evader")
        if self.layout is None and self.random_layout is None:
            for spec in self.agents:
                if spec.initial is None:
                    raise ValueError(f"{spec.role.value} agent has no initial pose and no layout is given")
                if spec.count != 1:
                    raise ValueError("count > 1 requires random_layout")
        if self.targeting.n_targets is not None and self.targeting.n_targets > n_evaders:
            raise ValueError(f"n_targets ({self.targeting.n_targets}) exceeds the number of evaders ({n_evaders})")
        return self

    @property
    def n_evaders(self) -> int:
        return sum(a.count for a in self.agents if a.role == Role.EVADER)

    @property
    def n_pursuers(self) -> int:
        return sum(a.count for a in self.agents if a.role == Role.PURSUER)

    def expanded_agents(self) -> List[AgentSpec]:
        """Agent blocks with `count` unrolled, in file order."""
        return [spec for spec in self.agents for _ in range(spec.count)]

    def initial_agents(self) -> List[Tuple[AgentParams, AgentState]]:
        """
        Build initial states for every agent; ids follow file order.

        Returns:
            List of (params, state) pairs
        """
        specs = self.expanded_agents()
        if self.layout is not None:
            poses = self._pair_poses(specs)
        elif self.random_layout is not None:
            poses = self._random_poses(specs)
        else:
            poses = [spec.initial for spec in specs]

        return [
            (spec.params, make_state(pose, spec.role, agent_id, spec.params.v_max))
            for agent_id, (spec, pose) in enumerate(zip(specs, poses))
        ]

    def _pair_poses(self, specs: List[AgentSpec]) -> List[InitialPose]:
        layout = self.layout
        poses = []
        for spec in specs:
            if spec.role == Role.PURSUER:
                poses.append(InitialPose(x=0.0, y=0.0, theta=0.0, v=layout.v_p0))
            else:
                poses.append(InitialPose(x=layout.d0, y=0.0, theta=wrap_angle(-layout.dtheta0), v=layout.v_e0))
        return poses

    def _random_poses(self, specs: List[AgentSpec]) -> List[InitialPose]:
        layout = self.random_layout
        rng = np.random.default_rng(layout.seed)

        def draw(box):
            return float(rng.uniform(box[0], box[1])), float(rng.uniform(box[2], box[3]))

        # Evaders first so pursuer headings can point at the evader centroid
        evader_xy = {i: draw(layout.evader_box) for i, s in enumerate(specs) if s.role == Role.EVADER}
        pursuer_xy = {i: draw(layout.pursuer_box) for i, s in enumerate(specs) if s.role == Role.PURSUER}
        cx = float(np.mean([p[0] for p in evader_xy.values()]))
        cy = float(np.mean([p[1] for p in evader_xy.values()]))

        poses = []
        for i, spec in enumerate(specs):
            initial_v = spec.initial.v if spec.initial is not None else 0.0
            if spec.role == Role.EVADER:
                x, y = evader_xy[i]
                poses.append(InitialPose(x=x, y=y, theta=0.0, v=initial_v))
            else:
                x, y = pursuer_xy[i]
                poses.append(InitialPose(x=x, y=y, theta=math.atan2(cy - y, cx - x), v=initial_v))
        return poses
