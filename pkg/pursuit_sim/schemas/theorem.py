"""
Pydantic schemas for the capture-condition checker and its report
"""
from typing import Optional, Tuple, Union

from pydantic import BaseModel, Field, model_validator

from pursuit_sim.schemas.scenario import ScenarioMetadata


class Theorem1Inputs(BaseModel):
    """Constants of the finite-time capture condition"""
    model_config = {"extra": "forbid", "allow_inf_nan": False, "frozen": True}

    V_p: float = Field(..., gt=0, description="Pursuer initial speed (m/s)")
    V_e: float = Field(..., gt=0, description="Evader initial speed (m/s)")
    W_p_max: float = Field(..., gt=0)
    W_e_max: float = Field(..., gt=0)
    r_p: float = Field(..., gt=0)
    r_e: float = Field(..., gt=0)
    a_p: float = Field(0.0, ge=0)
    a_e: float = Field(0.0, ge=0)
    c_p: float = Field(0.0, ge=0, lt=1)
    c_e: float = Field(0.0, ge=0, lt=1)
    k_p: float = Field(..., ge=0)
    k_e: float = Field(..., ge=0)
    eps1: float = Field(..., gt=0)
    eps2: float = Field(..., gt=0)
    d0: float = Field(..., gt=0)
    gamma_angle: float = Field(0.0, ge=0, description="Initial pursuer heading slack (rad)")
    V_p_max: Optional[float] = Field(None, gt=0, description="Speed cap; defaults to V_p")
    V_e_max: Optional[float] = Field(None, gt=0, description="Speed cap; defaults to V_e")

    @model_validator(mode='after')
    def validate_initial_distance(self):
        """Validate the pair starts inside the alert distance"""
        if self.d0 > self.eps1:
            raise ValueError(f"d0 ({self.d0}) must not exceed eps1 ({self.eps1})")
        return self

    @property
    def v_p_cap(self) -> float:
        return self.V_p if self.V_p_max is None else self.V_p_max

    @property
    def v_e_cap(self) -> float:
        return self.V_e if self.V_e_max is None else self.V_e_max


class Theorem1Report(BaseModel):
    """Per-condition results side by side with the closed-form oracle"""
    cond_i: bool
    cond_ii: bool
    cond_iii: bool
    cond_iv: bool
    cond_v: bool
    rho1: float
    rho2: float
    eps1_bound: Optional[float] = Field(None, description="rho1 + sqrt(eps2^2 - rho2^2); null when undefined")
    bound_defined: bool
    T_bound: float
    closed_form_final_distance: float
    captured_by_oracle: bool
    all_conditions_hold: bool
    capture_asserted: bool


class Theorem2Inputs(BaseModel):
    """Start point and constants of the reduced clearance ODE"""
    model_config = {"extra": "forbid", "allow_inf_nan": False, "frozen": True}

    q0: Tuple[float, float] = Field(..., description="Initial offset from the group center (m)")
    d_des: float = Field(1.0, gt=0, description="Desired clearance (m)")
    t_end: float = Field(50.0, gt=0, description="Integration horizon (s)")
    dt: float = Field(0.01, gt=0, description="Euler step (s)")

    @model_validator(mode='after')
    def validate_step(self):
        """Validate the step fits the horizon"""
        if self.dt > self.t_end:
            raise ValueError(f"dt ({self.dt}) must not exceed t_end ({self.t_end})")
        return self


TheoremInputs = Union[Theorem1Inputs, Theorem2Inputs]


class TheoremFile(BaseModel):
    """Capture-condition or clearance-ODE inputs as stored on disk; exactly one block"""
    model_config = {"extra": "forbid"}

    metadata: ScenarioMetadata
    theorem1: Optional[Theorem1Inputs] = None
    theorem2: Optional[Theorem2Inputs] = None

    @model_validator(mode='after')
    def validate_single_block(self):
        """Validate exactly one inputs block is present"""
        if (self.theorem1 is None) == (self.theorem2 is None):
            raise ValueError("inputs file needs exactly one of theorem1 or theorem2")
        return self

    @property
    def inputs(self) -> TheoremInputs:
        return self.theorem1 if self.theorem1 is not None else self.theorem2
