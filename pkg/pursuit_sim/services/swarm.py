"""
Swarm Controller

Group-aware evader strategies (aggregation, selfish blending, isolated
rejoining) and cooperative pursuers (repulsion, target selection and
switching) for many pursuers against many evaders.
"""
import math
from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

import structlog

from pursuit_sim.core.errors import DegenerateGeometryError, DomainError
from pursuit_sim.models import PostCaptureBehavior, SelectionRule
from pursuit_sim.schemas.agent import AgentParams, AgentState, ControlCommand, PhaseState
from pursuit_sim.schemas.scenario import EngagementConfig, MultiConfig, TargetingConfig
from pursuit_sim.services.alert_turn import (
    heading_error,
    pursuer_long,
    pursuer_short,
    ramp_up,
    short_speed,
    short_turn_rate,
)
from pursuit_sim.utils.core_math import MathConfig, Position, distance, rel_angle, wrap_angle

logger = structlog.get_logger()

# Floor for desired clearances so a member sitting on the center keeps d_des > 0
MIN_CLEARANCE = 1e-6

# math.exp overflows just above 709
EXP_LIMIT = 700.0


@dataclass(frozen=True)
class GroupState:
    """Main/isolated split of the uncaptured evaders"""
    main_members: FrozenSet[int]
    isolated_members: FrozenSet[int]
    d_des_per_member: Dict[int, float]
    iso_threshold: float

    @classmethod
    def initial(cls, evaders: Mapping[int, AgentState], iso_threshold: Optional[float] = None) -> "GroupState":
        """All evaders start in the main group; clearances come from the initial spread."""
        d_des = clearances(evaders, evaders.keys())
        if iso_threshold is None:
            iso_threshold = 2.0 * sum(d_des.values()) / len(d_des)
        return cls(
            main_members=frozenset(evaders),
            isolated_members=frozenset(),
            d_des_per_member=d_des,
            iso_threshold=iso_threshold,
        )


@dataclass(frozen=True)
class TargetingState:
    """Pursuer-to-evader assignment and capture bookkeeping"""
    target_of: Dict[int, Optional[int]]
    last_detection_time: Optional[float]
    delta_t_bar: float
    pt: float
    n_targets: int
    selection_rule: SelectionRule = SelectionRule.SHORTEST_PREDICTED_TIME
    post_capture_behavior: PostCaptureBehavior = PostCaptureBehavior.RETARGET
    captured: FrozenSet[int] = frozenset()
    stopped_pursuers: FrozenSet[int] = frozenset()

    @classmethod
    def initial(cls, pursuer_ids: Iterable[int], cfg: TargetingConfig, n_evaders: int) -> "TargetingState":
        return cls(
            target_of={pid: None for pid in pursuer_ids},
            last_detection_time=None,
            delta_t_bar=cfg.interval,
            pt=cfg.pt,
            n_targets=cfg.n_targets or n_evaders,
            selection_rule=cfg.selection_rule,
            post_capture_behavior=cfg.post_capture_behavior,
        )

    @property
    def n_captured(self) -> int:
        return len(self.captured)

    @property
    def done(self) -> bool:
        return self.n_captured >= self.n_targets


@dataclass
class Switch:
    """One target change emitted by a detection pass"""
    pursuer_id: int
    old_target: Optional[int]
    new_target: Optional[int]


def center(evaders: Mapping[int, AgentState], members: Iterable[int]) -> Position:
    """Arithmetic mean of member positions."""
    ids = list(members)
    if not ids:
        raise DomainError("center of an empty group")
    return (
        math.fsum(evaders[i].x for i in ids) / len(ids),
        math.fsum(evaders[i].y for i in ids) / len(ids),
    )


def clearances(evaders: Mapping[int, AgentState], members: Iterable[int]) -> Dict[int, float]:
    """Distance of every member to the group center, floored at MIN_CLEARANCE."""
    ids = sorted(members)
    c = center(evaders, ids)
    return {i: max(distance(evaders[i].position, c), MIN_CLEARANCE) for i in ids}


def clamp_to_envelope(cmd: ControlCommand, params: AgentParams) -> ControlCommand:
    """Clip v into [0, v_max] and w into [-w_max, w_max]."""
    v = min(max(cmd.v, 0.0), params.v_max)
    w = min(max(cmd.w, -params.w_max), params.w_max)
    return ControlCommand(v, w)


def aggregation_cmd(
    e_i: AgentState,
    group_center: Position,
    d_des: float,
    pursuer: AgentState,
    params: AgentParams,
) -> Tuple[ControlCommand, float]:
    """
    Formation command pulling a main-group member to its clearance from the center.

    Args:
        e_i: Evader state
        group_center: Center of the main group
        d_des: Desired clearance of this member
        pursuer: Closest pursuer
        params: Evader envelope

    Returns:
        (command, sigma); v is clamped, w is not

    Raises:
        DegenerateGeometryError: if the evader sits on the center or the pursuer does
    """
    dx = e_i.x - group_center[0]
    dy = e_i.y - group_center[1]
    exponent = -(d_des * d_des - (dx * dx + dy * dy))
    sigma = 0.0 if exponent > EXP_LIMIT else 2.0 / (1.0 + math.exp(exponent))

    radial = dx * math.cos(e_i.theta) + dy * math.sin(e_i.theta)
    v = min(max(-(1.0 - sigma) * radial + params.v_max, 0.0), params.v_max)

    to_center = rel_angle(e_i.position, group_center)
    away = rel_angle(pursuer.position, group_center)
    w = -wrap_angle(e_i.theta - (1.0 - sigma) * to_center - sigma * away)
    return ControlCommand(v, w), sigma


def escape_cmd(
    e_i: AgentState,
    ps: PhaseState,
    pursuer: AgentState,
    params: AgentParams,
    t: float,
) -> ControlCommand:
    """Run straight away from the pursuer with a proportional heading law."""
    v = ramp_up(ps, params, t)
    return ControlCommand(v, -heading_error(e_i, pursuer))


def join_cmd(
    e_i: AgentState,
    ps: PhaseState,
    main_center: Position,
    params: AgentParams,
    t: float,
) -> ControlCommand:
    """Head for the center of the main group."""
    v = ramp_up(ps, params, t)
    return ControlCommand(v, -wrap_angle(e_i.theta - rel_angle(e_i.position, main_center)))


def beta_weight(dist: float, cfg: MultiConfig, eps1: float) -> float:
    """Pursuer influence on an isolated evader: 1 inside eps1, decaying beyond."""
    return math.exp(-cfg.k_beta * max(0.0, dist - eps1))


def _blend(first: ControlCommand, second: ControlCommand, weight: float, params: AgentParams) -> ControlCommand:
    if not 0.0 <= weight <= 1.0:
        raise DomainError(f"blend weight must lie in [0, 1], got {weight}")
    v = (1.0 - weight) * first.v + weight * second.v
    w = (1.0 - weight) * first.w + weight * second.w
    return clamp_to_envelope(ControlCommand(v, w), params)


def blend_main(agg: ControlCommand, esc: ControlCommand, alpha: float, params: AgentParams) -> ControlCommand:
    """(1 - alpha) aggregation + alpha escape, clipped to the envelope."""
    return _blend(agg, esc, alpha, params)


def blend_isolated(joi: ControlCommand, esc: ControlCommand, beta: float, params: AgentParams) -> ControlCommand:
    """(1 - beta) rejoin + beta escape, clipped to the envelope."""
    return _blend(joi, esc, beta, params)


def repulsion_offset(p_j: AgentState, peers: Iterable[AgentState], cfg: MultiConfig) -> float:
    """
    Sum of repulsion terms from pursuers closer than d_safe.

    Each term is (m_rep / d) * wrap(theta_j - bearing(p_j -> p_k)).

    Raises:
        DegenerateGeometryError: if two pursuers coincide
    """
    total = 0.0
    for peer in peers:
        if peer.id == p_j.id:
            continue
        d = distance(p_j.position, peer.position)
        if d >= cfg.d_safe:
            continue
        if d == 0.0:
            raise DegenerateGeometryError(f"pursuers {p_j.id} and {peer.id} coincide")
        total += cfg.m_rep / d * wrap_angle(p_j.theta - rel_angle(p_j.position, peer.position))
    return total


def pursuer_long_multi(
    p_j: AgentState,
    ps: PhaseState,
    target: AgentState,
    peers: Iterable[AgentState],
    params: AgentParams,
    cfg: MultiConfig,
    eng: EngagementConfig,
    t: float,
    math_cfg: MathConfig,
) -> ControlCommand:
    """Long-distance pursuer law with inter-pursuer repulsion folded into the heading error."""
    offset = repulsion_offset(p_j, peers, cfg)
    return pursuer_long(p_j, ps, target, params, eng, t, math_cfg, steering_offset=offset)


def evader_short_multi(
    e_i: AgentState,
    ps: PhaseState,
    p_l: AgentState,
    params: AgentParams,
    dist: float,
    t: float,
) -> ControlCommand:
    """
    Short-distance evader law against the closest pursuer.

    Same speed and magnitude as the single-pair law; the turn is clockwise
    when wrap(theta_pl - theta_ei) > 0.
    """
    v = short_speed(ps, params, t)
    magnitude = short_turn_rate(params, v, dist)
    if wrap_angle(p_l.theta - e_i.theta) > 0:
        return ControlCommand(v, -magnitude)
    return ControlCommand(v, magnitude)


def pursuer_short_multi(
    p_j: AgentState,
    ps: PhaseState,
    target: AgentState,
    params: AgentParams,
    w_target: float,
    dist: float,
    t: float,
) -> ControlCommand:
    """Short-distance pursuer law: mirror the target's turn direction, as in the single pair."""
    return pursuer_short(p_j, ps, target, params, w_target, dist, t)


def classify_groups(
    evaders: Mapping[int, AgentState],
    group: GroupState,
    captured: Set[int],
    finished_short: Set[int],
) -> GroupState:
    """
    Move evaders between the main and isolated groups.

    A main member that just ended a short-phase episode is isolated when its
    distance to the center of the remaining main members exceeds the threshold.
    An isolated evader rejoins once that distance is within the threshold.
    Captured evaders leave both groups.

    Args:
        evaders: Current evader states by id
        group: Previous split
        captured: Ids of captured evaders
        finished_short: Ids whose short-phase episode ended this step

    Returns:
        Updated split (``group`` itself when nothing moved)
    """
    main = set(group.main_members) - captured
    isolated = set(group.isolated_members) - captured

    for i in sorted(finished_short & main):
        rest = main - {i}
        if rest and distance(evaders[i].position, center(evaders, rest)) > group.iso_threshold:
            main.discard(i)
            isolated.add(i)

    for i in sorted(isolated):
        if main and distance(evaders[i].position, center(evaders, main)) <= group.iso_threshold:
            isolated.discard(i)
            main.add(i)

    if main == group.main_members and isolated == group.isolated_members:
        return group
    return replace(group, main_members=frozenset(main), isolated_members=frozenset(isolated))


def refresh_clearances(evaders: Mapping[int, AgentState], group: GroupState) -> GroupState:
    """Recompute d_des of the main members from their current spread."""
    if not group.main_members:
        return group
    d_des = dict(group.d_des_per_member)
    d_des.update(clearances(evaders, group.main_members))
    return replace(group, d_des_per_member=d_des)


def predicted_capture_time(p: AgentState, e: AgentState, params_p: AgentParams, params_e: AgentParams) -> float:
    """
    Predicted time for ``p`` to close on ``e`` under a constant closing-speed model.

    Returns:
        d / (vp_max - ve_max) when the pursuer is faster, d / vp_max otherwise
    """
    if params_p.v_max <= 0:
        raise DomainError("pursuer with zero top speed cannot capture")
    d = distance(p.position, e.position)
    if params_p.v_max > params_e.v_max:
        return d / (params_p.v_max - params_e.v_max)
    return d / params_p.v_max


def _cost(
    rule: SelectionRule,
    p: AgentState,
    e: AgentState,
    params_p: AgentParams,
    params_e: AgentParams,
) -> float:
    if rule == SelectionRule.CLOSEST_DISTANCE:
        return distance(p.position, e.position)
    return predicted_capture_time(p, e, params_p, params_e)


def select_targets(
    pursuers: Mapping[int, AgentState],
    evaders: Mapping[int, AgentState],
    params: Mapping[int, AgentParams],
    ts: TargetingState,
    now: float,
) -> Tuple[TargetingState, List[Switch]]:
    """
    Detection pass: assign orphaned pursuers and switch targets on a much better candidate.

    Orphans (no target or a captured one) reassign at once. Otherwise a pass runs
    only when the detection interval has elapsed, and a pursuer switches iff the
    best candidate's cost is below pt times its current target's cost. Ties go to
    the lowest evader id.

    Args:
        pursuers: Pursuer states by id
        evaders: Evader states by id
        params: Envelope of every agent by id
        ts: Current targeting state
        now: Current time

    Returns:
        (new targeting state, list of switches)
    """
    if ts.last_detection_time is not None and now < ts.last_detection_time:
        raise DomainError(f"detection at t={now} precedes the previous pass at t={ts.last_detection_time}")

    alive = sorted(i for i in evaders if i not in ts.captured)
    due = ts.last_detection_time is None or now - ts.last_detection_time >= ts.delta_t_bar

    target_of = dict(ts.target_of)
    switches: List[Switch] = []
    for pid in sorted(pursuers):
        old = target_of.get(pid)
        if pid in ts.stopped_pursuers or not alive:
            new = None
        else:
            p = pursuers[pid]
            costs = {eid: _cost(ts.selection_rule, p, evaders[eid], params[pid], params[eid]) for eid in alive}
            best = min(alive, key=lambda eid: (costs[eid], eid))
            if old is None or old in ts.captured:
                new = best
            elif due and best != old and costs[best] < ts.pt * costs[old]:
                new = best
            else:
                new = old
        if new != old:
            target_of[pid] = new
            switches.append(Switch(pid, old, new))

    last = now if due else ts.last_detection_time
    return replace(ts, target_of=target_of, last_detection_time=last), switches


def register_capture(ts: TargetingState, evader_id: int, capturer_id: Optional[int]) -> TargetingState:
    """Record a capture and apply the capturer's post-capture behavior."""
    captured = ts.captured | {evader_id}
    stopped = ts.stopped_pursuers
    target_of = dict(ts.target_of)
    if capturer_id is not None and ts.post_capture_behavior == PostCaptureBehavior.STOP:
        stopped = stopped | {capturer_id}
        target_of[capturer_id] = None
    logger.debug("evader_captured", evader_id=evader_id, capturer_id=capturer_id, n_captured=len(captured))
    return replace(ts, captured=captured, stopped_pursuers=stopped, target_of=target_of)

