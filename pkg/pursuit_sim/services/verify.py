"""
Capture-Condition and Aggregation Checks

Numerical embodiments of the finite-time capture condition (condition
checker, closed-form max-turn trajectories, open-loop integration) and of the
aggregation convergence result (reduced clearance ODE with its Lyapunov
sequence).
"""
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import structlog

from pursuit_sim.core.errors import DomainError
from pursuit_sim.schemas.theorem import Theorem1Inputs, Theorem1Report
from pursuit_sim.utils.core_math import Position, acot_pos, distance

logger = structlog.get_logger()


def turn_horizon(inputs: Theorem1Inputs) -> float:
    """pi / (2 W_p_max): the pursuer's quarter turn."""
    return math.pi / (2.0 * inputs.W_p_max)


def rho_terms(inputs: Theorem1Inputs) -> Tuple[float, float]:
    """The two bound terms of the alert-distance condition."""
    wp, we = inputs.W_p_max, inputs.W_e_max
    rho1 = (
        inputs.V_p - inputs.V_e
        - 2.0 * inputs.a_e / we ** 2
        - inputs.a_e * math.pi / (2.0 * wp * we)
        + (1.0 - math.pi / 2.0) * inputs.a_p / wp ** 2
    )
    rho2 = 2.0 * inputs.V_e / we - inputs.V_p / wp + inputs.a_p / wp ** 2 - inputs.a_e / we ** 2
    return rho1, rho2


def theorem1_check(inputs: Theorem1Inputs) -> Theorem1Report:
    """
    Evaluate the five sufficient conditions for finite-time capture as printed.

    The steering-gain condition is evaluated at the initial speeds. Capture is
    asserted only when every condition and both standing assumptions
    (V_p > V_e, W_e_max > W_p_max) hold; the closed-form distance at the
    quarter-turn horizon is reported alongside.

    Args:
        inputs: Engagement constants

    Returns:
        Per-condition report; eps1_bound is null when eps2^2 < rho2^2
    """
    wp, we = inputs.W_p_max, inputs.W_e_max
    horizon = turn_horizon(inputs)

    cond_i = inputs.r_p >= inputs.V_p * wp and inputs.r_e >= inputs.V_e * we
    cond_ii = (
        acot_pos(inputs.k_p * inputs.eps1) / inputs.V_p >= wp
        and acot_pos(inputs.k_e * inputs.eps1) / inputs.V_e >= we
    )
    # The evader line uses the pursuer's quarter-turn horizon as printed
    cond_iii = (
        inputs.V_p - inputs.a_p * horizon >= inputs.c_p * inputs.v_p_cap
        and inputs.V_e - inputs.a_e * horizon >= inputs.c_e * inputs.v_e_cap
    )
    cond_iv = wp < we <= 3.0 * wp

    rho1, rho2 = rho_terms(inputs)
    radicand = inputs.eps2 ** 2 - rho2 ** 2
    bound_defined = radicand >= 0.0
    eps1_bound = rho1 + math.sqrt(radicand) if bound_defined else None
    cond_v = bound_defined and inputs.eps1 < eps1_bound

    _, _, final_distance = closed_form_theorem1(horizon, inputs)
    all_conditions = cond_i and cond_ii and cond_iii and cond_iv and cond_v
    assumptions = inputs.V_p > inputs.V_e and we > wp

    report = Theorem1Report(
        cond_i=cond_i,
        cond_ii=cond_ii,
        cond_iii=cond_iii,
        cond_iv=cond_iv,
        cond_v=cond_v,
        rho1=rho1,
        rho2=rho2,
        eps1_bound=eps1_bound,
        bound_defined=bound_defined,
        T_bound=horizon,
        closed_form_final_distance=final_distance,
        captured_by_oracle=final_distance <= inputs.eps2,
        all_conditions_hold=all_conditions,
        capture_asserted=all_conditions and assumptions,
    )
    if not bound_defined:
        logger.warning("capture_bound_undefined", eps2=inputs.eps2, rho2=rho2)
    return report


def _max_turn_position(v: float, a: float, w: float, t: float) -> Position:
    # Exact integral of (v - a s)(cos, sin)(pi/2 + w s) from 0 to t
    c, s = math.cos(w * t), math.sin(w * t)
    x = (v / w) * (c - 1.0) - (a / w) * t * c + (a / w ** 2) * s
    y = (v / w) * s - (a / w) * t * s + (a / w ** 2) * (1.0 - c)
    return x, y


def closed_form_theorem1(t: float, inputs: Theorem1Inputs) -> Tuple[Position, Position, float]:
    """
    Positions of both agents turning at full rate from the normalized start.

    Pursuer starts at the origin, evader at (0, d0), both heading +y.

    Raises:
        DomainError: if t lies outside [0, pi / (2 W_p_max)]
    """
    horizon = turn_horizon(inputs)
    if not 0.0 <= t <= horizon * (1.0 + 1e-12):
        raise DomainError(f"t={t} outside [0, {horizon}]")

    pursuer = _max_turn_position(inputs.V_p, inputs.a_p, inputs.W_p_max, t)
    ex, ey = _max_turn_position(inputs.V_e, inputs.a_e, inputs.W_e_max, t)
    evader = (ex, ey + inputs.d0)
    return pursuer, evader, distance(pursuer, evader)


@dataclass
class MaxTurnTrajectory:
    """Sampled open-loop trajectory of both agents"""
    t: np.ndarray
    pursuer: np.ndarray
    evader: np.ndarray

    @property
    def distance(self) -> np.ndarray:
        return np.linalg.norm(self.pursuer - self.evader, axis=1)


def integrate_mdd(inputs: Theorem1Inputs, dt: float) -> MaxTurnTrajectory:
    """
    Explicit Euler integration of the open-loop max-turn dynamics over the quarter turn.

    The pursuer starts at heading pi/2 - gamma_angle, the evader at pi/2; speeds
    decay at a_p, a_e and both turn left at full rate.

    Args:
        inputs: Engagement constants
        dt: Step size

    Returns:
        Trajectory sampled at every step, endpoints included
    """
    if dt <= 0:
        raise DomainError(f"step size must be positive, got {dt}")
    n = max(1, int(math.ceil(turn_horizon(inputs) / dt - 1e-9)))
    t = np.arange(n + 1) * dt
    t[-1] = min(t[-1], turn_horizon(inputs))
    steps = np.diff(t)
    ts = t[:-1]

    def euler(v0: float, a: float, w: float, heading0: float, start: Position) -> np.ndarray:
        # The field depends on time only, so Euler is a left Riemann sum
        speed = v0 - a * ts
        heading = heading0 + w * ts
        dx = np.concatenate(([0.0], np.cumsum(speed * np.cos(heading) * steps)))
        dy = np.concatenate(([0.0], np.cumsum(speed * np.sin(heading) * steps)))
        return np.column_stack((start[0] + dx, start[1] + dy))

    half_pi = math.pi / 2.0
    pursuer = euler(inputs.V_p, inputs.a_p, inputs.W_p_max, half_pi - inputs.gamma_angle, (0.0, 0.0))
    evader = euler(inputs.V_e, inputs.a_e, inputs.W_e_max, half_pi, (0.0, inputs.d0))
    return MaxTurnTrajectory(t=t, pursuer=pursuer, evader=evader)


def closed_form_error(inputs: Theorem1Inputs, dt: float) -> float:
    """Max position error of :func:`integrate_mdd` against the closed form."""
    traj = integrate_mdd(inputs, dt)
    worst = 0.0
    for k, tk in enumerate(traj.t):
        pursuer, evader, _ = closed_form_theorem1(float(tk), inputs)
        worst = max(
            worst,
            distance(pursuer, tuple(traj.pursuer[k])),
            distance(evader, tuple(traj.evader[k])),
        )
    return worst


@dataclass
class ReducedOdeResult:
    """Clearance-vector trajectory and its Lyapunov sequence"""
    t: np.ndarray
    q: np.ndarray
    J: np.ndarray
    d_des: float

    @property
    def final_norm(self) -> float:
        return float(np.linalg.norm(self.q[-1]))

    def lyapunov_monotone(self) -> bool:
        """J moves toward d_des^2 at every step, in the direction fixed by the start."""
        steps = np.diff(self.J)
        if self.J[0] > self.d_des ** 2:
            return bool(np.all(steps <= 0.0))
        if self.J[0] < self.d_des ** 2:
            return bool(np.all(steps >= 0.0))
        return bool(np.all(steps == 0.0))


def theorem2_reduced_ode(q0: Tuple[float, float], d_des: float, t_end: float, dt: float = 0.01) -> ReducedOdeResult:
    """
    Integrate dq/dt = -q (1 - 2 / (1 + exp(|q|^2 - d_des^2))) with explicit Euler.

    The bracket equals tanh((|q|^2 - d_des^2) / 2), which is evaluated directly
    to stay finite for large |q|.

    Raises:
        DomainError: if d_des, t_end or dt is not positive
    """
    if d_des <= 0 or t_end <= 0 or dt <= 0:
        raise DomainError("d_des, t_end and dt must be positive")

    n = int(round(t_end / dt))
    q = np.empty((n + 1, 2))
    q[0] = q0
    d2 = d_des * d_des
    qx, qy = float(q0[0]), float(q0[1])
    for k in range(n):
        rate = math.tanh(0.5 * (qx * qx + qy * qy - d2))
        qx -= dt * qx * rate
        qy -= dt * qy * rate
        q[k + 1] = (qx, qy)

    J = np.einsum("ij,ij->i", q, q)
    return ReducedOdeResult(t=np.arange(n + 1) * dt, q=q, J=J, d_des=d_des)
