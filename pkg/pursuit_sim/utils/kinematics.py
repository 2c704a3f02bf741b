"""
Unicycle vector field and fixed-step integrators.

Commands are held constant across a step, so mode switching is frozen within
the step for every scheme.
"""
import math
from typing import Callable, Dict, Tuple

from pursuit_sim.models import IntegratorEnum
from pursuit_sim.schemas.agent import AgentState, ControlCommand
from pursuit_sim.utils.core_math import wrap_angle

Derivative = Tuple[float, float, float]
Integrator = Callable[[AgentState, ControlCommand, float], AgentState]


def unicycle_derivative(state: AgentState, cmd: ControlCommand) -> Derivative:
    """(v cos theta, v sin theta, w)"""
    return (cmd.v * math.cos(state.theta), cmd.v * math.sin(state.theta), cmd.w)


def euler_step(state: AgentState, cmd: ControlCommand, dt: float) -> AgentState:
    """Explicit Euler step; displacement magnitude is exactly v*dt."""
    dx, dy, dtheta = unicycle_derivative(state, cmd)
    return AgentState(
        x=state.x + dx * dt,
        y=state.y + dy * dt,
        theta=wrap_angle(state.theta + dtheta * dt),
        v=cmd.v,
        role=state.role,
        id=state.id,
    )


def rk4_step(state: AgentState, cmd: ControlCommand, dt: float) -> AgentState:
    """Classical Runge-Kutta step with the command held constant."""
    v, w = cmd.v, cmd.w
    theta = state.theta

    # Only theta enters the field, and theta(t) is linear under constant w
    thetas = (theta, theta + 0.5 * dt * w, theta + 0.5 * dt * w, theta + dt * w)
    weights = (1.0, 2.0, 2.0, 1.0)
    dx = sum(wt * v * math.cos(th) for wt, th in zip(weights, thetas)) / 6.0
    dy = sum(wt * v * math.sin(th) for wt, th in zip(weights, thetas)) / 6.0

    return AgentState(
        x=state.x + dx * dt,
        y=state.y + dy * dt,
        theta=wrap_angle(theta + w * dt),
        v=v,
        role=state.role,
        id=state.id,
    )


INTEGRATORS: Dict[IntegratorEnum, Integrator] = {
    IntegratorEnum.EULER: euler_step,
    IntegratorEnum.RK4: rk4_step,
}


def get_integrator(kind: IntegratorEnum) -> Integrator:
    """Look up a registered integrator."""
    return INTEGRATORS[IntegratorEnum(kind)]
