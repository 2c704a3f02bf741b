"""
Alert-Turn Controller

Phase classification and the long/short distance control laws for one pursuer
against one evader. Every law is a pure function of the pre-step snapshot.
"""
import structlog

from pursuit_sim.core.errors import TimeRegressionError
from pursuit_sim.models import AlignBranch, Phase, Role, SpeedBranch
from pursuit_sim.schemas.agent import AgentParams, AgentState, ControlCommand, PhaseState
from pursuit_sim.schemas.scenario import EngagementConfig
from pursuit_sim.utils.core_math import (
    MathConfig,
    rel_angle,
    sat,
    sat2,
    sgn_fin,
    sign,
    steering_profile,
    wrap_angle,
)

logger = structlog.get_logger()


def classify_phase(dist: float, cfg: EngagementConfig) -> Phase:
    """
    Classify the engagement by pursuer-evader distance.

    Args:
        dist: Current pursuer-evader distance
        cfg: Engagement radii

    Returns:
        STOPPED inside the capture radius, LONG beyond the alert distance, SHORT otherwise
    """
    if dist <= cfg.eps2:
        return Phase.STOPPED
    if dist > cfg.eps1:
        return Phase.LONG
    return Phase.SHORT


def elapsed(ps: PhaseState, t: float) -> float:
    """Time since the last bookkeeping event."""
    if t < ps.t_bar:
        raise TimeRegressionError(f"t={t} precedes t_bar={ps.t_bar}")
    return t - ps.t_bar


def ramp_up(ps: PhaseState, params: AgentParams, t: float) -> float:
    """sat(v(t_bar) + a(t - t_bar), v_max)"""
    return sat(ps.v_at_t_bar + params.a * elapsed(ps, t), params.v_max)


def heading_error(state: AgentState, toward: AgentState) -> float:
    """Wrapped offset of the heading from the bearing pursuer -> evader.

    ``state`` is the agent being steered, ``toward`` the other agent of the pair.
    The bearing always runs from pursuer to evader, so the evader flees along it
    and the pursuer closes along it.
    """
    if state.role == Role.PURSUER:
        bearing = rel_angle(state.position, toward.position)
    else:
        bearing = rel_angle(toward.position, state.position)
    return wrap_angle(state.theta - bearing)


def evader_long(
    e: AgentState,
    ps: PhaseState,
    p: AgentState,
    params: AgentParams,
    t: float,
    math_cfg: MathConfig,
) -> ControlCommand:
    """
    Long-distance evader law: accelerate and align with the line of sight.

    Args:
        e: Evader state
        ps: Evader phase bookkeeping
        p: Pursuer state
        params: Evader envelope
        t: Current time
        math_cfg: Finite-time sign exponent

    Returns:
        Escape command

    Raises:
        DegenerateGeometryError: if the agents coincide
    """
    v = ramp_up(ps, params, t)
    w = -sgn_fin(heading_error(e, p), params.turn_cap(v), math_cfg.gamma)
    return ControlCommand(v, w)


def pursuer_long(
    p: AgentState,
    ps: PhaseState,
    e: AgentState,
    params: AgentParams,
    cfg: EngagementConfig,
    t: float,
    math_cfg: MathConfig,
    steering_offset: float = 0.0,
) -> ControlCommand:
    """
    Long-distance pursuer law: chase at full ramp while aligned, slow down to turn.

    The branch is read from ``ps.align_branch``; the caller keeps it current with
    :func:`alignment_flip_due`. ``steering_offset`` is subtracted from the heading
    error (zero for a lone pursuer).

    Raises:
        DegenerateGeometryError: if the agents coincide
    """
    if ps.align_branch == AlignBranch.ALIGNED:
        v = ramp_up(ps, params, t)
    else:
        floor = params.c * params.v_max
        v = min(sat2(ps.v_at_t_bar - params.a * elapsed(ps, t), floor), params.v_max)

    err = wrap_angle(heading_error(p, e) - steering_offset)
    w = -sgn_fin(err, params.turn_cap(v), math_cfg.gamma)
    return ControlCommand(v, w)


def alignment_flip_due(err: float, ps: PhaseState, cfg: EngagementConfig) -> bool:
    """Whether the pursuer's aligned/turning branch flips, with hysteresis around bar_theta."""
    if ps.align_branch == AlignBranch.ALIGNED:
        return abs(err) > cfg.bar_theta + cfg.align_hysteresis
    return abs(err) <= cfg.bar_theta


def short_speed(ps: PhaseState, params: AgentParams, t: float) -> float:
    """Speed along the latched short-phase branch."""
    if ps.speed_branch == SpeedBranch.DECELERATING:
        return sat(max(0.0, ps.v_at_t_bar - params.a * elapsed(ps, t)), params.v_max)
    return ramp_up(ps, params, t)


def speed_floor_reached(state: AgentState, ps: PhaseState, params: AgentParams) -> bool:
    """Whether the decelerating short-phase branch has hit its floor c*v_max."""
    return ps.speed_branch == SpeedBranch.DECELERATING and state.v <= params.c * params.v_max


def short_turn_rate(params: AgentParams, v: float, dist: float) -> float:
    """
    Unsigned short-phase turn rate: steering profile over speed, capped.

    At v = 0 the quotient is unbounded and the cap reduces to w_max.
    """
    cap = params.turn_cap(v)
    if v <= 0:
        return cap
    return min(steering_profile(params.k, dist) / v, cap)


def evader_short(
    e: AgentState,
    ps: PhaseState,
    p: AgentState,
    params: AgentParams,
    dist: float,
    t: float,
) -> ControlCommand:
    """
    Short-distance evader law: decelerate, then turn sharply away.

    Turns clockwise when wrap(theta_e - theta_p) > 0, counter-clockwise otherwise.
    """
    v = short_speed(ps, params, t)
    magnitude = short_turn_rate(params, v, dist)
    if wrap_angle(e.theta - p.theta) > 0:
        return ControlCommand(v, -magnitude)
    return ControlCommand(v, magnitude)


def pursuer_short(
    p: AgentState,
    ps: PhaseState,
    e: AgentState,
    params: AgentParams,
    w_e: float,
    dist: float,
    t: float,
) -> ControlCommand:
    """Short-distance pursuer law: follow the evader's turn direction this step."""
    v = short_speed(ps, params, t)
    return ControlCommand(v, sign(w_e) * short_turn_rate(params, v, dist))


def update_phase_bookkeeping(
    prev: PhaseState,
    new_phase: Phase,
    branch_flip: bool,
    t: float,
    v: float,
) -> PhaseState:
    """
    Advance the event bookkeeping behind the speed ramps.

    t_bar and v(t_bar) reset on a phase change or a branch flip. In the long phase
    a flip toggles the pursuer's alignment branch; in the short phase it latches
    the speed branch to accelerating.

    Args:
        prev: Bookkeeping from the previous step
        new_phase: Phase classified this step
        branch_flip: Whether a branch flip is due
        t: Current time
        v: Current speed of the agent

    Returns:
        Updated bookkeeping (``prev`` itself when nothing happened)

    Raises:
        TimeRegressionError: if t precedes prev.t_bar
    """
    if t < prev.t_bar:
        raise TimeRegressionError(f"t={t} precedes t_bar={prev.t_bar}")

    state = prev
    if new_phase != prev.phase:
        if new_phase == Phase.SHORT:
            speed_branch = SpeedBranch.DECELERATING
        else:
            speed_branch = SpeedBranch.ACCELERATING
        state = PhaseState(
            phase=new_phase,
            t_bar=t,
            v_at_t_bar=v,
            speed_branch=speed_branch,
            align_branch=prev.align_branch,
        )

    if not branch_flip:
        return state

    if new_phase == Phase.LONG:
        align = AlignBranch.TURNING if state.align_branch == AlignBranch.ALIGNED else AlignBranch.ALIGNED
        return PhaseState(new_phase, t, v, state.speed_branch, align)
    if new_phase == Phase.SHORT and state.speed_branch == SpeedBranch.DECELERATING:
        return PhaseState(new_phase, t, v, SpeedBranch.ACCELERATING, state.align_branch)
    return state


def advance_phase(
    prev: PhaseState,
    new_phase: Phase,
    t: float,
    v: float,
    flip_due,
) -> PhaseState:
    """Apply the phase change, then any branch flip ``flip_due(ps)`` reports for it."""
    ps = update_phase_bookkeeping(prev, new_phase, False, t, v)
    if new_phase != Phase.STOPPED and flip_due(ps):
        ps = update_phase_bookkeeping(ps, new_phase, True, t, v)
    return ps

