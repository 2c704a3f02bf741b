"""
Strategy registry: per-step planning for single-pair and swarm engagements.

A strategy owns the controller-side bookkeeping (phase states, groups,
targets) and turns a pre-step snapshot into one command per agent.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Type

import structlog

from pursuit_sim.core.errors import DegenerateGeometryError
from pursuit_sim.models import EventKind, ModeEnum, Phase, Role, TraceEvent
from pursuit_sim.schemas.agent import STOP, AgentParams, AgentState, ControlCommand, PhaseState
from pursuit_sim.schemas.scenario import Scenario
from pursuit_sim.services import alert_turn, swarm
from pursuit_sim.utils.core_math import distance, wrap_angle

logger = structlog.get_logger()

Capture = Tuple[int, Optional[int]]


@dataclass
class StepPlan:
    """Commands and labels produced for one step"""
    commands: Dict[int, ControlCommand] = field(default_factory=dict)
    phases: Dict[int, Phase] = field(default_factory=dict)
    targets: Dict[int, Optional[int]] = field(default_factory=dict)
    events: List[TraceEvent] = field(default_factory=list)


class BaseStrategy(ABC):
    """Base class for all engagement strategies"""

    def __init__(self, scenario: Scenario, agents: Sequence[Tuple[AgentParams, AgentState]]):
        """
        Initialize strategy bookkeeping.

        Args:
            scenario: Validated scenario
            agents: (params, initial state) per agent, ids in file order
        """
        self.scenario = scenario
        self.eng = scenario.engagement
        self.math_cfg = scenario.integration.math_config
        self.params: Dict[int, AgentParams] = {state.id: params for params, state in agents}
        self.pursuer_ids = [state.id for _, state in agents if state.role == Role.PURSUER]
        self.evader_ids = [state.id for _, state in agents if state.role == Role.EVADER]
        self.phase_states: Dict[int, PhaseState] = {
            state.id: PhaseState.initial(state.v) for _, state in agents
        }

    @abstractmethod
    def plan(self, states: Dict[int, AgentState], t: float) -> StepPlan:
        """Compute every agent's command from the pre-step snapshot."""

    @abstractmethod
    def check_captures(self, states: Dict[int, AgentState], t: float) -> List[Capture]:
        """Register captures on post-step positions; returns (evader id, capturer id) pairs."""

    @property
    @abstractmethod
    def done(self) -> bool:
        """Whether the required number of evaders has been captured."""

    def _advance(self, state: AgentState, phase: Phase, t: float, flip_due) -> PhaseState:
        ps = alert_turn.advance_phase(self.phase_states[state.id], phase, t, state.v, flip_due)
        self.phase_states[state.id] = ps
        return ps

    def _pursuer_flip(self, p: AgentState, target: AgentState, offset: float = 0.0):
        params = self.params[p.id]

        def flip_due(ps: PhaseState) -> bool:
            if ps.phase == Phase.LONG:
                err = wrap_angle(alert_turn.heading_error(p, target) - offset)
                return alert_turn.alignment_flip_due(err, ps, self.eng)
            return alert_turn.speed_floor_reached(p, ps, params)

        return flip_due

    def _evader_flip(self, e: AgentState):
        params = self.params[e.id]

        def flip_due(ps: PhaseState) -> bool:
            return ps.phase == Phase.SHORT and alert_turn.speed_floor_reached(e, ps, params)

        return flip_due


class AlertTurnStrategy(BaseStrategy):
    """One pursuer against one evader"""

    def __init__(self, scenario: Scenario, agents: Sequence[Tuple[AgentParams, AgentState]]):
        super().__init__(scenario, agents)
        self.pursuer_id = self.pursuer_ids[0]
        self.evader_id = self.evader_ids[0]
        self.captured = False
        self.pair_phase = Phase.LONG

    @property
    def done(self) -> bool:
        return self.captured

    def plan(self, states: Dict[int, AgentState], t: float) -> StepPlan:
        p = states[self.pursuer_id]
        e = states[self.evader_id]
        plan = StepPlan(targets={self.pursuer_id: self.evader_id, self.evader_id: None})

        if self.captured:
            for agent_id in (self.pursuer_id, self.evader_id):
                plan.commands[agent_id] = STOP
                plan.phases[agent_id] = Phase.STOPPED
            return plan

        dist = distance(p.position, e.position)
        phase = alert_turn.classify_phase(dist, self.eng)
        self._record_transition(phase, t, plan.events)

        ps_e = self._advance(e, phase, t, self._evader_flip(e))
        ps_p = self._advance(p, phase, t, self._pursuer_flip(p, e))
        params_e = self.params[e.id]
        params_p = self.params[p.id]

        if phase == Phase.LONG:
            cmd_e = alert_turn.evader_long(e, ps_e, p, params_e, t, self.math_cfg)
            cmd_p = alert_turn.pursuer_long(p, ps_p, e, params_p, self.eng, t, self.math_cfg)
        elif phase == Phase.SHORT:
            cmd_e = alert_turn.evader_short(e, ps_e, p, params_e, dist, t)
            cmd_p = alert_turn.pursuer_short(p, ps_p, e, params_p, cmd_e.w, dist, t)
        else:
            cmd_e = cmd_p = STOP

        plan.commands[e.id] = cmd_e
        plan.commands[p.id] = cmd_p
        plan.phases[e.id] = phase
        plan.phases[p.id] = phase
        return plan

    def _record_transition(self, phase: Phase, t: float, events: List[TraceEvent]) -> None:
        ids = (self.pursuer_id, self.evader_id)
        if self.pair_phase == Phase.LONG and phase == Phase.SHORT:
            events.append(TraceEvent(t, EventKind.ALERT_ENTERED, ids))
        elif self.pair_phase == Phase.SHORT and phase == Phase.LONG:
            events.append(TraceEvent(t, EventKind.ALERT_EXITED, ids))
        self.pair_phase = phase

    def check_captures(self, states: Dict[int, AgentState], t: float) -> List[Capture]:
        if self.captured:
            return []
        p = states[self.pursuer_id]
        e = states[self.evader_id]
        if distance(p.position, e.position) <= self.eng.eps2:
            self.captured = True
            return [(self.evader_id, self.pursuer_id)]
        return []


class SwarmStrategy(BaseStrategy):
    """Many pursuers against many evaders"""

    def __init__(self, scenario: Scenario, agents: Sequence[Tuple[AgentParams, AgentState]]):
        super().__init__(scenario, agents)
        self.multi = scenario.multi
        states = {state.id: state for _, state in agents}
        evaders = {i: states[i] for i in self.evader_ids}
        self.group = swarm.GroupState.initial(evaders, self.multi.iso_threshold)
        self.targeting = swarm.TargetingState.initial(self.pursuer_ids, scenario.targeting, len(self.evader_ids))
        self.evader_phase: Dict[int, Phase] = {i: Phase.LONG for i in self.evader_ids}
        self.finished_short: set = set()
        self.last_refresh = 0.0
        logger.warning(
            "turn_sign_convention_differs",
            detail="swarm evaders branch on wrap(theta_pl - theta_ei) > 0, the pair law on wrap(theta_e - theta_p) > 0",
        )

    @property
    def done(self) -> bool:
        return self.targeting.done

    def _closest_pursuer(self, e: AgentState, states: Dict[int, AgentState]) -> Tuple[int, float]:
        best = min(self.pursuer_ids, key=lambda pid: (distance(states[pid].position, e.position), pid))
        return best, distance(states[best].position, e.position)

    def plan(self, states: Dict[int, AgentState], t: float) -> StepPlan:
        plan = StepPlan()
        pursuers = {i: states[i] for i in self.pursuer_ids}
        evaders = {i: states[i] for i in self.evader_ids}
        captured = self.targeting.captured

        # 1. Target detection
        self.targeting, switches = swarm.select_targets(pursuers, evaders, self.params, self.targeting, t)
        for sw in switches:
            if sw.old_target is not None and sw.new_target is not None:
                plan.events.append(TraceEvent(t, EventKind.TARGET_SWITCHED, (sw.pursuer_id, sw.new_target)))

        # 2. Groups
        self._update_groups(evaders, t, plan.events)

        # 3-4. Evader phases and commands
        closest: Dict[int, Tuple[int, float]] = {}
        for eid in self.evader_ids:
            e = evaders[eid]
            plan.targets[eid] = None
            if eid in captured:
                plan.commands[eid] = STOP
                plan.phases[eid] = Phase.STOPPED
                continue
            pid, dist = self._closest_pursuer(e, states)
            closest[eid] = (pid, dist)
            phase = alert_turn.classify_phase(dist, self.eng)
            self._record_transition(eid, pid, phase, t, plan.events)
            ps = self._advance(e, phase, t, self._evader_flip(e))
            plan.phases[eid] = phase
            plan.commands[eid] = self._evader_command(e, ps, states[pid], dist, phase, evaders, t)

        # 4. Pursuer commands consume this step's evader turn rates
        for pid in self.pursuer_ids:
            p = pursuers[pid]
            target_id = self.targeting.target_of.get(pid)
            plan.targets[pid] = target_id
            if target_id is None or plan.phases.get(target_id) in (None, Phase.STOPPED):
                plan.commands[pid] = STOP
                plan.phases[pid] = Phase.STOPPED
                continue
            target = evaders[target_id]
            phase = plan.phases[target_id]
            params = self.params[pid]
            if phase == Phase.SHORT:
                ps = self._advance(p, phase, t, self._pursuer_flip(p, target))
                dist = distance(p.position, target.position)
                cmd = swarm.pursuer_short_multi(p, ps, target, params, plan.commands[target_id].w, dist, t)
            else:
                peers = [pursuers[k] for k in self.pursuer_ids if k != pid]
                offset = swarm.repulsion_offset(p, peers, self.multi)
                ps = self._advance(p, phase, t, self._pursuer_flip(p, target, offset))
                cmd = swarm.pursuer_long_multi(p, ps, target, peers, params, self.multi, self.eng, t, self.math_cfg)
            plan.commands[pid] = cmd
            plan.phases[pid] = phase
        return plan

    def _evader_command(
        self,
        e: AgentState,
        ps: PhaseState,
        pursuer: AgentState,
        dist: float,
        phase: Phase,
        evaders: Dict[int, AgentState],
        t: float,
    ) -> ControlCommand:
        params = self.params[e.id]
        if phase == Phase.STOPPED:
            return STOP
        if phase == Phase.SHORT:
            return swarm.evader_short_multi(e, ps, pursuer, params, dist, t)

        esc = swarm.escape_cmd(e, ps, pursuer, params, t)
        main = self.group.main_members
        if e.id in main:
            if len(main) < 2:
                return swarm.clamp_to_envelope(esc, params)
            group_center = swarm.center(evaders, sorted(main))
            d_des = self.group.d_des_per_member[e.id]
            try:
                agg, _ = swarm.aggregation_cmd(e, group_center, d_des, pursuer, params)
            except DegenerateGeometryError:
                # Member exactly on the center has no bearing to it
                return swarm.clamp_to_envelope(esc, params)
            return swarm.blend_main(agg, esc, self.multi.alpha, params)

        if not main:
            return swarm.clamp_to_envelope(esc, params)
        joi = swarm.join_cmd(e, ps, swarm.center(evaders, sorted(main)), params, t)
        beta = swarm.beta_weight(dist, self.multi, self.eng.eps1)
        return swarm.blend_isolated(joi, esc, beta, params)

    def _update_groups(self, evaders: Dict[int, AgentState], t: float, events: List[TraceEvent]) -> None:
        before = self.group
        self.group = swarm.classify_groups(evaders, before, set(self.targeting.captured), self.finished_short)
        self.finished_short = set()
        for i in sorted(self.group.isolated_members - before.isolated_members):
            events.append(TraceEvent(t, EventKind.ISOLATED, (i,)))
        for i in sorted(before.isolated_members - self.group.isolated_members):
            if i in self.group.main_members:
                events.append(TraceEvent(t, EventKind.REJOINED, (i,)))

        period = self.multi.d_des_update_period
        if period is not None and t - self.last_refresh >= period:
            self.group = swarm.refresh_clearances(evaders, self.group)
            self.last_refresh = t

    def _record_transition(self, eid: int, pid: int, phase: Phase, t: float, events: List[TraceEvent]) -> None:
        prev = self.evader_phase[eid]
        if prev == Phase.LONG and phase == Phase.SHORT:
            events.append(TraceEvent(t, EventKind.ALERT_ENTERED, (pid, eid)))
        elif prev == Phase.SHORT and phase == Phase.LONG:
            events.append(TraceEvent(t, EventKind.ALERT_EXITED, (pid, eid)))
            self.finished_short.add(eid)
        self.evader_phase[eid] = phase

    def check_captures(self, states: Dict[int, AgentState], t: float) -> List[Capture]:
        captures: List[Capture] = []
        for eid in self.evader_ids:
            if eid in self.targeting.captured:
                continue
            pid, dist = self._closest_pursuer(states[eid], states)
            if dist <= self.eng.eps2:
                self.targeting = swarm.register_capture(self.targeting, eid, pid)
                captures.append((eid, pid))
        return captures


STRATEGIES: Dict[ModeEnum, Type[BaseStrategy]] = {
    ModeEnum.SINGLE: AlertTurnStrategy,
    ModeEnum.MULTI: SwarmStrategy,
}


def get_strategy(scenario: Scenario, agents: Sequence[Tuple[AgentParams, AgentState]]) -> BaseStrategy:
    """
    Build the strategy for a scenario.

    A multi-mode scenario with exactly one pursuer and one evader runs the
    pair strategy, so both modes produce the same trace for it.
    """
    mode = scenario.mode
    if mode == ModeEnum.MULTI and scenario.n_pursuers == 1 and scenario.n_evaders == 1:
        logger.info("multi_mode_pair_delegated", scenario=scenario.metadata.name)
        mode = ModeEnum.SINGLE
    return STRATEGIES[mode](scenario, agents)
