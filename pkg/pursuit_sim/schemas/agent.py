"""
Agent schemas: the validated capability envelope plus the runtime value types
the controllers and the engine pass around every step.
"""
import math
from dataclasses import dataclass
from typing import Optional

from pydantic import BaseModel, Field

from pursuit_sim.models import AlignBranch, Phase, Role, SpeedBranch
from pursuit_sim.utils.core_math import wrap_angle


class AgentParams(BaseModel):
    """Capability envelope and steering gain of one robot"""
    model_config = {"frozen": True, "extra": "forbid", "allow_inf_nan": False}

    v_max: float = Field(..., gt=0, description="Maximum linear speed (m/s)")
    w_max: float = Field(..., gt=0, description="Maximum angular speed (rad/s)")
    r: float = Field(..., gt=0, description="Maximum centripetal acceleration (m/s^2)")
    a: float = Field(..., ge=0, description="Tangential acceleration (m/s^2)")
    c: float = Field(0.1, ge=0, lt=1, description="Deceleration floor as a fraction of v_max")
    k: float = Field(5.0, ge=0, description="Short-phase steering gain (1/m)")

    def turn_cap(self, v: float) -> float:
        """min(r/v, w_max), with the v -> 0 limit taken as w_max."""
        if v <= 0:
            return self.w_max
        return min(self.r / v, self.w_max)


@dataclass(frozen=True, slots=True)
class AgentState:
    """Pose and current speed of one robot"""
    x: float
    y: float
    theta: float
    v: float
    role: Role
    id: int

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)

    def is_finite(self) -> bool:
        return all(math.isfinite(value) for value in (self.x, self.y, self.theta, self.v))


@dataclass(frozen=True, slots=True)
class ControlCommand:
    """Linear and angular speed command"""
    v: float
    w: float

    def within(self, params: AgentParams, tol: float = 1e-12) -> bool:
        """True if the command respects the issuing agent's envelope."""
        return -tol <= self.v <= params.v_max + tol and abs(self.w) <= params.w_max + tol


STOP = ControlCommand(0.0, 0.0)


@dataclass(frozen=True, slots=True)
class PhaseState:
    """Event bookkeeping behind every v(t_bar) + a(t - t_bar) ramp"""
    phase: Phase
    t_bar: float
    v_at_t_bar: float
    speed_branch: SpeedBranch = SpeedBranch.ACCELERATING
    align_branch: AlignBranch = AlignBranch.ALIGNED

    @classmethod
    def initial(cls, v0: float, phase: Phase = Phase.LONG, t0: float = 0.0) -> "PhaseState":
        branch = SpeedBranch.DECELERATING if phase == Phase.SHORT else SpeedBranch.ACCELERATING
        return cls(phase=phase, t_bar=t0, v_at_t_bar=v0, speed_branch=branch)


class InitialPose(BaseModel):
    """Initial pose as written in a scenario file"""
    model_config = {"extra": "forbid", "allow_inf_nan": False}

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0
    v: float = Field(0.0, ge=0)


def make_state(pose: InitialPose, role: Role, agent_id: int, v_max: Optional[float] = None) -> AgentState:
    """Build a runtime state from a file pose, clamping speed into the envelope."""
    v = pose.v if v_max is None else min(pose.v, v_max)
    return AgentState(x=pose.x, y=pose.y, theta=wrap_angle(pose.theta), v=v, role=role, id=agent_id)
