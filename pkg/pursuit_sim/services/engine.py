"""
Simulation Engine

Deterministic fixed-step loop: plan commands from the pre-step snapshot,
integrate the unicycle model, check captures on post-step positions, record.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import structlog

from pursuit_sim.core.errors import DomainError, IntegrityError
from pursuit_sim.models import EventKind, Phase, Role, TraceEvent, TraceRecord, TraceSummary
from pursuit_sim.schemas.agent import AgentParams, AgentState, ControlCommand
from pursuit_sim.schemas.scenario import Scenario
from pursuit_sim.services.strategies import BaseStrategy, Capture, StepPlan, get_strategy
from pursuit_sim.utils.core_math import distance
from pursuit_sim.utils.kinematics import Integrator, get_integrator

logger = structlog.get_logger()

Pair = Tuple[int, int]


@dataclass
class World:
    """Mutable run state threaded through :func:`step`"""
    states: Dict[int, AgentState]
    params: Dict[int, AgentParams]
    strategy: BaseStrategy
    integrator: Integrator
    dt: float


@dataclass
class SimTrace:
    """Recorded rows, events and summary of one run"""
    scenario_name: str
    dt: float
    records: List[TraceRecord] = field(default_factory=list)
    events: List[TraceEvent] = field(default_factory=list)
    summary: TraceSummary = field(default_factory=TraceSummary)

    @property
    def times(self) -> List[float]:
        seen: List[float] = []
        for record in self.records:
            if not seen or record.t != seen[-1]:
                seen.append(record.t)
        return seen

    def agent_rows(self, agent_id: int) -> List[TraceRecord]:
        return [r for r in self.records if r.agent_id == agent_id]

    def events_of(self, kind: EventKind) -> List[TraceEvent]:
        return [ev for ev in self.events if ev.kind == kind]


def init_world(scenario: Scenario) -> World:
    """Build initial states and the strategy for a scenario."""
    agents = scenario.initial_agents()
    return World(
        states={state.id: state for _, state in agents},
        params={state.id: params for params, state in agents},
        strategy=get_strategy(scenario, agents),
        integrator=get_integrator(scenario.integration.integrator),
        dt=scenario.integration.dt,
    )


def step(world: World, t: float) -> Tuple[StepPlan, List[Capture]]:
    """
    Advance the world by one step starting at time t.

    Args:
        world: Run state, updated in place
        t: Time at the start of the step

    Returns:
        (plan applied during the step, captures detected at t + dt)

    Raises:
        IntegrityError: if a command leaves its envelope or a state turns non-finite
    """
    plan = world.strategy.plan(world.states, t)

    new_states: Dict[int, AgentState] = {}
    for agent_id, state in world.states.items():
        cmd = plan.commands[agent_id]
        _check_command(cmd, world.params[agent_id], agent_id, t)
        new_state = world.integrator(state, cmd, world.dt)
        if not new_state.is_finite():
            raise IntegrityError(
                f"non-finite state for agent {agent_id} at t={t}",
                diagnostics={"t": t, "agent_id": agent_id, "state": repr(state), "command": repr(cmd)},
            )
        new_states[agent_id] = new_state

    world.states = new_states
    captures = world.strategy.check_captures(new_states, t + world.dt)
    return plan, captures


def _check_command(cmd: ControlCommand, params: AgentParams, agent_id: int, t: float) -> None:
    if not cmd.within(params):
        raise IntegrityError(
            f"command {cmd} of agent {agent_id} at t={t} leaves the envelope",
            diagnostics={"t": t, "agent_id": agent_id, "v": cmd.v, "w": cmd.w, "v_max": params.v_max},
        )


def _pairs(states: Dict[int, AgentState]) -> List[Pair]:
    pursuers = sorted(i for i, s in states.items() if s.role == Role.PURSUER)
    evaders = sorted(i for i, s in states.items() if s.role == Role.EVADER)
    return [(p, e) for p in pursuers for e in evaders]


def _track_distances(summary: TraceSummary, states: Dict[int, AgentState], pairs: List[Pair]) -> None:
    for pair in pairs:
        d = distance(states[pair[0]].position, states[pair[1]].position)
        if d < summary.min_distance[pair]:
            summary.min_distance[pair] = d


def run(scenario: Scenario, record_trace: bool = True) -> SimTrace:
    """
    Simulate a scenario until the required captures happen or t_f is reached.

    Rows at time k*dt hold the pre-step state with the command applied from
    that instant; one closing row holds the final state.

    Args:
        scenario: Validated scenario
        record_trace: Keep per-step rows (sweeps only need the summary)

    Returns:
        Trace with events and summary; never-captured evaders get t_d = t_f
    """
    world = init_world(scenario)
    trace = SimTrace(scenario_name=scenario.metadata.name, dt=world.dt)
    summary = trace.summary
    pairs = _pairs(world.states)
    evader_ids = sorted(i for i, s in world.states.items() if s.role == Role.EVADER)

    summary.min_distance = {pair: float("inf") for pair in pairs}
    summary.captured = {eid: False for eid in evader_ids}
    _track_distances(summary, world.states, pairs)

    def register(captures: List[Capture], at: float) -> None:
        for evader_id, capturer_id in captures:
            summary.captured[evader_id] = True
            summary.capture_time[evader_id] = at
            summary.capture_order.append(at)
            ids = (capturer_id, evader_id) if capturer_id is not None else (evader_id,)
            trace.events.append(TraceEvent(at, EventKind.CAPTURED, ids))

    register(world.strategy.check_captures(world.states, 0.0), 0.0)

    n_steps = scenario.integration.n_steps
    last_plan: Optional[StepPlan] = None
    k = 0
    while k < n_steps and not world.strategy.done:
        t = k * world.dt
        before = world.states
        plan, captures = step(world, t)
        trace.events.extend(plan.events)
        if record_trace:
            trace.records.extend(_rows(t, before, plan))
        k += 1
        register(captures, k * world.dt)
        _track_distances(summary, world.states, pairs)
        last_plan = plan

    t_end = k * world.dt
    if record_trace:
        trace.records.extend(_closing_rows(t_end, world, last_plan))

    for eid in evader_ids:
        summary.capture_time.setdefault(eid, scenario.integration.t_f)
    summary.t_final = t_end
    summary.steps = k

    logger.debug(
        "simulation_completed",
        scenario=scenario.metadata.name,
        steps=k,
        captured=sum(summary.captured.values()),
        t_final=t_end,
    )
    return trace


def _rows(t: float, states: Dict[int, AgentState], plan: StepPlan) -> List[TraceRecord]:
    rows = []
    for agent_id in sorted(states):
        s = states[agent_id]
        cmd = plan.commands[agent_id]
        rows.append(TraceRecord(
            t=t,
            agent_id=agent_id,
            role=s.role,
            x=s.x,
            y=s.y,
            theta=s.theta,
            v=cmd.v,
            w=cmd.w,
            phase=plan.phases[agent_id],
            target_id=plan.targets.get(agent_id),
        ))
    return rows


def _closing_rows(t: float, world: World, last_plan: Optional[StepPlan]) -> List[TraceRecord]:
    rows = []
    done = world.strategy.done
    for agent_id in sorted(world.states):
        s = world.states[agent_id]
        if done or last_plan is None:
            phase, w, target = Phase.STOPPED, 0.0, None
        else:
            phase = last_plan.phases[agent_id]
            w = last_plan.commands[agent_id].w
            target = last_plan.targets.get(agent_id)
        rows.append(TraceRecord(t, agent_id, s.role, s.x, s.y, s.theta, s.v, w, phase, target))
    return rows


def min_distance(trace: SimTrace, pair: Pair) -> float:
    """
    Minimum recorded distance between a pursuer and an evader.

    Raises:
        DomainError: if the pair is not part of the run
    """
    if pair in trace.summary.min_distance:
        return trace.summary.min_distance[pair]
    flipped = (pair[1], pair[0])
    if flipped in trace.summary.min_distance:
        return trace.summary.min_distance[flipped]
    raise DomainError(f"pair {pair} is not a pursuer-evader pair of this run")
