from pursuit_sim.schemas.agent import AgentParams, AgentState, ControlCommand, PhaseState
from pursuit_sim.schemas.scenario import EngagementConfig, MultiConfig, Scenario, TargetingConfig
from pursuit_sim.schemas.sweep import SweepGrid, SweepResult
from pursuit_sim.schemas.theorem import Theorem1Inputs, Theorem1Report, Theorem2Inputs

__all__ = [
    "AgentParams",
    "AgentState",
    "ControlCommand",
    "PhaseState",
    "EngagementConfig",
    "MultiConfig",
    "Scenario",
    "TargetingConfig",
    "SweepGrid",
    "SweepResult",
    "Theorem1Inputs",
    "Theorem1Report",
    "Theorem2Inputs",
]
