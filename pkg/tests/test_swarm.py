"""
Tests for swarm strategies: aggregation, blending, repulsion, groups and targeting
"""
import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from pursuit_sim.core.errors import DegenerateGeometryError, DomainError
from pursuit_sim.models import AlignBranch, Phase, PostCaptureBehavior, SelectionRule, SpeedBranch
from pursuit_sim.schemas.agent import AgentParams, ControlCommand, PhaseState
from pursuit_sim.schemas.scenario import EngagementConfig, MultiConfig, TargetingConfig
from pursuit_sim.services.alert_turn import pursuer_long, pursuer_short
from pursuit_sim.services.swarm import (
    GroupState,
    TargetingState,
    aggregation_cmd,
    beta_weight,
    blend_isolated,
    blend_main,
    center,
    classify_groups,
    clearances,
    escape_cmd,
    evader_short_multi,
    join_cmd,
    predicted_capture_time,
    pursuer_long_multi,
    pursuer_short_multi,
    register_capture,
    repulsion_offset,
    select_targets,
)
from pursuit_sim.utils.core_math import MathConfig
from tests.conftest import evader_at, pursuer_at


def _targeting(target_of, delta_t_bar=0.5, pt=0.2, last=0.0, rule=SelectionRule.CLOSEST_DISTANCE, **kwargs):
    return TargetingState(
        target_of=target_of,
        last_detection_time=last,
        delta_t_bar=delta_t_bar,
        pt=pt,
        n_targets=kwargs.pop("n_targets", 2),
        selection_rule=rule,
        **kwargs,
    )


@pytest.fixture
def chase_params(pursuer_params, evader_params):
    """Envelopes keyed by agent id: pursuer 0, evaders 1 and 2"""
    return {0: pursuer_params, 1: evader_params, 2: evader_params}


def test_center_and_clearances():
    """Test group center and per-member clearances"""
    evaders = {1: evader_at(-1.0, 0.0), 2: evader_at(1.0, 0.0), 3: evader_at(0.0, 3.0, agent_id=3)}
    assert center(evaders, [1, 2]) == (0.0, 0.0)
    d_des = clearances(evaders, [1, 2])
    assert d_des == {1: pytest.approx(1.0), 2: pytest.approx(1.0)}
    with pytest.raises(DomainError):
        center(evaders, [])


def test_clearance_floor_for_member_on_center():
    """Test a member on the center keeps a positive clearance"""
    evaders = {1: evader_at(0.0, 0.0), 2: evader_at(0.0, 0.0, agent_id=2)}
    assert all(d > 0 for d in clearances(evaders, [1, 2]).values())


def test_group_initial_threshold():
    """Test the default isolation threshold is twice the mean clearance"""
    evaders = {1: evader_at(-1.0, 0.0), 2: evader_at(1.0, 0.0, agent_id=2)}
    group = GroupState.initial(evaders)
    assert group.main_members == frozenset({1, 2})
    assert group.iso_threshold == pytest.approx(2.0)
    assert GroupState.initial(evaders, 5.0).iso_threshold == 5.0


def test_aggregation_sigma_at_center(evader_params):
    """Test sigma = 2 / (1 + e^-1) when the member sits (almost) on the center"""
    _, sigma = aggregation_cmd(evader_at(1e-9, 0.0), (0.0, 0.0), 1.0, pursuer_at(-3.0, 0.0), evader_params)
    assert sigma == pytest.approx(1.46212, abs=1e-5)


def test_aggregation_at_desired_clearance(evader_params):
    """Test sigma = 1 turns the member purely away from the pursuer"""
    e = evader_at(1.0, 0.0, theta=0.3)
    cmd, sigma = aggregation_cmd(e, (0.0, 0.0), 1.0, pursuer_at(-3.0, 0.0), evader_params)
    assert sigma == pytest.approx(1.0)
    assert cmd.v == evader_params.v_max
    assert cmd.w == pytest.approx(-0.3)


def test_aggregation_far_member_does_not_overflow(evader_params):
    """Test a member far outside its clearance yields sigma = 0"""
    cmd, sigma = aggregation_cmd(evader_at(100.0, 0.0), (0.0, 0.0), 0.5, pursuer_at(-3.0, 0.0), evader_params)
    assert sigma == pytest.approx(0.0)
    assert 0.0 <= cmd.v <= evader_params.v_max


def test_aggregation_on_center_is_degenerate(evader_params):
    """Test a member exactly on the center has no bearing"""
    with pytest.raises(DegenerateGeometryError):
        aggregation_cmd(evader_at(0.0, 0.0), (0.0, 0.0), 1.0, pursuer_at(-3.0, 0.0), evader_params)


def test_escape_cmd(evader_params):
    """Test escape ramps speed and turns onto the line of sight"""
    ps = PhaseState(Phase.LONG, 0.0, 0.3)
    cmd = escape_cmd(evader_at(1.0, 0.0, theta=0.4), ps, pursuer_at(0.0, 0.0), evader_params, 1.0)
    assert cmd.v == pytest.approx(0.6)
    assert cmd.w == pytest.approx(-0.4)


def test_join_cmd(evader_params):
    """Test an isolated evader heads for the main center"""
    ps = PhaseState(Phase.LONG, 0.0, 0.3)
    cmd = join_cmd(evader_at(0.0, 0.0, theta=-0.2), ps, (1.0, 0.0), evader_params, 0.0)
    assert cmd.v == pytest.approx(0.3)
    assert cmd.w == pytest.approx(0.2)


def test_beta_weight(multi_cfg):
    """Test beta is 1 inside the alert distance and decays beyond"""
    assert beta_weight(0.5, multi_cfg, 1.0) == 1.0
    assert beta_weight(3.0, multi_cfg, 1.0) == pytest.approx(0.36788, abs=1e-5)


def test_blend_endpoints_and_midpoint(evader_params):
    """Test alpha = 0 and 1 reproduce the inputs, 0.5 averages them"""
    agg = ControlCommand(0.6, 0.3)
    esc = ControlCommand(0.2, -0.5)
    assert blend_main(agg, esc, 0.0, evader_params) == agg
    assert blend_main(agg, esc, 1.0, evader_params) == esc
    mid = blend_main(agg, esc, 0.5, evader_params)
    assert mid.v == pytest.approx(0.4)
    assert mid.w == pytest.approx(-0.1)


def test_blend_clips_to_envelope(evader_params):
    """Test blended commands are clipped to the envelope"""
    cmd = blend_isolated(ControlCommand(0.6, 3.0), ControlCommand(0.6, 3.0), 0.5, evader_params)
    assert cmd.w == evader_params.w_max
    with pytest.raises(DomainError):
        blend_isolated(ControlCommand(0.6, 0.0), ControlCommand(0.6, 0.0), 1.5, evader_params)


@given(
    alpha=st.floats(min_value=0.0, max_value=1.0),
    v1=st.floats(min_value=0.0, max_value=0.6),
    v2=st.floats(min_value=0.0, max_value=0.6),
    w1=st.floats(min_value=-4.0, max_value=4.0),
    w2=st.floats(min_value=-4.0, max_value=4.0),
)
def test_blend_always_within_envelope(alpha, v1, v2, w1, w2):
    """Test blends of arbitrary commands respect the envelope"""
    params = AgentParams(v_max=0.6, w_max=2.0, r=0.2, a=0.3)
    assert blend_main(ControlCommand(v1, w1), ControlCommand(v2, w2), alpha, params).within(params)


def test_repulsion_offset(multi_cfg):
    """Test repulsion from a close peer and none from a distant one"""
    p = pursuer_at(0.0, 0.0, theta=0.2)
    close = pursuer_at(0.4, 0.0, agent_id=5)
    far = pursuer_at(1.0, 0.0, agent_id=6)
    assert repulsion_offset(p, [close], multi_cfg) == pytest.approx(0.05)
    assert repulsion_offset(p, [far], multi_cfg) == 0.0
    assert repulsion_offset(p, [p], multi_cfg) == 0.0  # self is skipped


def test_repulsion_coincident_pursuers(multi_cfg):
    """Test coincident pursuers are degenerate"""
    with pytest.raises(DegenerateGeometryError):
        repulsion_offset(pursuer_at(0.0, 0.0), [pursuer_at(0.0, 0.0, agent_id=5)], multi_cfg)


def test_pursuer_long_multi_without_peers(pursuer_params, engagement, multi_cfg, math_cfg):
    """Test the swarm pursuer law reduces to the pair law with no peers in range"""
    ps = PhaseState(Phase.LONG, 0.0, 0.8)
    p = pursuer_at(0.0, 0.0, theta=0.05)
    e = evader_at(3.0, 1.0)
    lone = pursuer_long(p, ps, e, pursuer_params, engagement, 0.5, math_cfg)
    peers = [pursuer_at(5.0, 5.0, agent_id=4)]
    assert pursuer_long_multi(p, ps, e, peers, pursuer_params, multi_cfg, engagement, 0.5, math_cfg) == lone


def test_evader_short_multi_sign_convention(evader_params):
    """Test the swarm short law branches on the pursuer's heading relative to the evader's"""
    ps = PhaseState(Phase.SHORT, 0.0, 0.5)
    e = evader_at(0.5, 0.0, theta=0.0)
    assert evader_short_multi(e, ps, pursuer_at(0.0, 0.0, theta=0.3), evader_params, 0.5, 0.0).w < 0
    assert evader_short_multi(e, ps, pursuer_at(0.0, 0.0, theta=-0.3), evader_params, 0.5, 0.0).w > 0


def test_classify_groups_isolates_far_member():
    """Test a member ending a short episode far from the rest is isolated"""
    evaders = {0: evader_at(-0.5, 0.0, agent_id=0), 1: evader_at(0.5, 0.0), 2: evader_at(0.0, 3.0, agent_id=2)}
    group = GroupState(frozenset({0, 1, 2}), frozenset(), {0: 0.5, 1: 0.5, 2: 0.5}, iso_threshold=2.0)

    unchanged = classify_groups(evaders, group, set(), set())
    assert unchanged is group  # only members that just left the short phase are checked

    updated = classify_groups(evaders, group, set(), {2})
    assert updated.main_members == frozenset({0, 1})
    assert updated.isolated_members == frozenset({2})


def test_classify_groups_rejoin():
    """Test an isolated evader within the threshold rejoins"""
    evaders = {0: evader_at(-0.5, 0.0, agent_id=0), 1: evader_at(0.5, 0.0), 2: evader_at(0.0, 1.9, agent_id=2)}
    group = GroupState(frozenset({0, 1}), frozenset({2}), {0: 0.5, 1: 0.5, 2: 0.5}, iso_threshold=2.0)
    updated = classify_groups(evaders, group, set(), set())
    assert updated.main_members == frozenset({0, 1, 2})
    assert not updated.isolated_members


def test_classify_groups_drops_captured():
    """Test captured evaders leave both groups"""
    evaders = {0: evader_at(-0.5, 0.0, agent_id=0), 1: evader_at(0.5, 0.0)}
    group = GroupState(frozenset({0, 1}), frozenset(), {0: 0.5, 1: 0.5}, iso_threshold=2.0)
    assert classify_groups(evaders, group, {1}, set()).main_members == frozenset({0})


def test_predicted_capture_time(pursuer_params, evader_params):
    """Test closing-speed prediction, and the fallback for a slower pursuer"""
    p = pursuer_at(0.0, 0.0)
    e = evader_at(3.0, 0.0)
    assert predicted_capture_time(p, e, pursuer_params, evader_params) == pytest.approx(5.0)
    fast_evader = AgentParams(v_max=1.5, w_max=2.0, r=0.2, a=0.3)
    assert predicted_capture_time(p, e, pursuer_params, fast_evader) == pytest.approx(2.5)


def test_select_targets_switches_on_much_better_candidate(chase_params):
    """Test a switch when the best cost is below pt times the current cost"""
    pursuers = {0: pursuer_at(0.0, 0.0)}
    evaders = {1: evader_at(5.0, 0.0), 2: evader_at(0.9, 0.0, agent_id=2)}
    ts, switches = select_targets(pursuers, evaders, chase_params, _targeting({0: 1}), 1.0)
    assert ts.target_of[0] == 2
    assert [(s.pursuer_id, s.old_target, s.new_target) for s in switches] == [(0, 1, 2)]
    assert ts.last_detection_time == 1.0


def test_select_targets_keeps_target_within_threshold(chase_params):
    """Test no switch when the candidate is not better by the threshold factor"""
    pursuers = {0: pursuer_at(0.0, 0.0)}
    evaders = {1: evader_at(5.0, 0.0), 2: evader_at(1.1, 0.0, agent_id=2)}
    ts, switches = select_targets(pursuers, evaders, chase_params, _targeting({0: 1}), 1.0)
    assert ts.target_of[0] == 1
    assert switches == []


def test_select_targets_waits_for_detection_interval(chase_params):
    """Test no switch before the interval elapses, and never with an infinite interval"""
    pursuers = {0: pursuer_at(0.0, 0.0)}
    evaders = {1: evader_at(5.0, 0.0), 2: evader_at(0.1, 0.0, agent_id=2)}
    ts, _ = select_targets(pursuers, evaders, chase_params, _targeting({0: 1}), 0.3)
    assert ts.target_of[0] == 1
    assert ts.last_detection_time == 0.0

    ts, _ = select_targets(pursuers, evaders, chase_params, _targeting({0: 1}, delta_t_bar=math.inf), 100.0)
    assert ts.target_of[0] == 1


def test_select_targets_assigns_orphans_immediately(chase_params):
    """Test unassigned and captured-target pursuers get the best target at once"""
    pursuers = {0: pursuer_at(0.0, 0.0)}
    evaders = {1: evader_at(5.0, 0.0), 2: evader_at(2.0, 0.0, agent_id=2)}
    ts, switches = select_targets(pursuers, evaders, chase_params, _targeting({0: None}, delta_t_bar=math.inf), 0.1)
    assert ts.target_of[0] == 2
    assert switches[0].old_target is None

    orphaned = _targeting({0: 2}, delta_t_bar=math.inf, captured=frozenset({2}))
    ts, _ = select_targets(pursuers, evaders, chase_params, orphaned, 0.1)
    assert ts.target_of[0] == 1


def test_select_targets_tie_breaks_on_lowest_id(chase_params):
    """Test equal costs go to the lowest evader id"""
    pursuers = {0: pursuer_at(0.0, 0.0)}
    evaders = {1: evader_at(0.0, 2.0), 2: evader_at(2.0, 0.0, agent_id=2)}
    ts, _ = select_targets(pursuers, evaders, chase_params, _targeting({0: None}), 0.0)
    assert ts.target_of[0] == 1


def test_select_targets_rejects_time_regression(chase_params):
    """Test a detection pass cannot run before the previous one"""
    with pytest.raises(DomainError):
        select_targets({0: pursuer_at(0.0, 0.0)}, {1: evader_at(1.0, 0.0)}, chase_params, _targeting({0: 1}, last=2.0), 1.0)


def test_register_capture_stop_behavior():
    """Test a stopping capturer is released and never reassigned"""
    ts = _targeting({0: 1, 3: 1}, post_capture_behavior=PostCaptureBehavior.STOP)
    ts = register_capture(ts, 1, 0)
    assert ts.captured == frozenset({1})
    assert ts.stopped_pursuers == frozenset({0})
    assert ts.target_of[0] is None
    assert ts.target_of[3] == 1  # reassigned on the next detection pass


def test_register_capture_retarget_and_done():
    """Test retargeting capturers keep running and the state completes at n_targets"""
    ts = _targeting({0: 1}, n_targets=2)
    ts = register_capture(ts, 1, 0)
    assert not ts.stopped_pursuers
    assert not ts.done
    assert register_capture(ts, 2, 0).done


def test_targeting_initial_from_config():
    """Test the default target count is every evader and null interval means infinite"""
    ts = TargetingState.initial([0, 1], TargetingConfig(), n_evaders=4)
    assert ts.n_targets == 4
    assert ts.delta_t_bar == math.inf
    assert ts.target_of == {0: None, 1: None}


def test_multi_config_defaults():
    """Test documented swarm defaults"""
    cfg = MultiConfig()
    assert (cfg.alpha, cfg.k_beta, cfg.m_rep, cfg.d_safe) == (0.0, 0.5, 0.1, 0.8)


@st.composite
def swarm_engagements(draw):
    """Random envelope, a pursuer, an evader, a peer pursuer and bookkeeping"""
    params = AgentParams(
        v_max=draw(st.floats(min_value=0.1, max_value=3.0)),
        w_max=draw(st.floats(min_value=0.1, max_value=4.0)),
        r=draw(st.floats(min_value=0.01, max_value=2.0)),
        a=draw(st.floats(min_value=0.0, max_value=2.0)),
        c=draw(st.floats(min_value=0.0, max_value=0.9)),
        k=draw(st.floats(min_value=0.0, max_value=10.0)),
    )
    coord = st.floats(min_value=-5, max_value=5)
    angle = st.floats(min_value=-math.pi, max_value=math.pi)
    speed = st.floats(min_value=0.0, max_value=params.v_max)
    x, y = draw(coord), draw(coord)
    e_dx, e_dy = draw(coord), draw(coord)
    q_dx, q_dy = draw(coord), draw(coord)
    assume(math.hypot(e_dx, e_dy) > 1e-3)
    assume(math.hypot(q_dx, q_dy) > 1e-3)
    p = pursuer_at(x, y, theta=draw(angle), v=draw(speed), agent_id=0)
    peer = pursuer_at(x + q_dx, y + q_dy, theta=draw(angle), v=draw(speed), agent_id=2)
    e = evader_at(x + e_dx, y + e_dy, theta=draw(angle), v=draw(speed), agent_id=1)
    ps = PhaseState(
        phase=Phase.LONG,
        t_bar=0.0,
        v_at_t_bar=draw(speed),
        speed_branch=draw(st.sampled_from(list(SpeedBranch))),
        align_branch=draw(st.sampled_from(list(AlignBranch))),
    )
    t = draw(st.floats(min_value=0.0, max_value=50.0))
    return params, p, peer, e, ps, t


@settings(max_examples=300)
@given(
    case=swarm_engagements(),
    w_target=st.floats(min_value=-5, max_value=5),
    d_safe=st.floats(min_value=0.1, max_value=8.0),
    m_rep=st.floats(min_value=0.0, max_value=5.0),
)
def test_swarm_pursuit_laws_respect_envelope(case, w_target, d_safe, m_rep):
    """Test pursuer and short-phase evader laws stay inside [0, v_max] x [-w_max, w_max]"""
    params, p, peer, e, ps, t = case
    cfg = MultiConfig(d_safe=d_safe, m_rep=m_rep)
    eng = EngagementConfig(eps1=1.0, eps2=0.1)
    dist = math.hypot(p.x - e.x, p.y - e.y)
    commands = [
        pursuer_long_multi(p, ps, e, [p, peer], params, cfg, eng, t, MathConfig(gamma=0.5)),
        pursuer_short_multi(p, ps, e, params, w_target, dist, t),
        evader_short_multi(e, ps, p, params, dist, t),
    ]
    for cmd in commands:
        assert cmd.within(params)


@settings(max_examples=300)
@given(
    case=swarm_engagements(),
    d_des=st.floats(min_value=0.01, max_value=5.0),
    alpha=st.floats(min_value=0.0, max_value=1.0),
    beta=st.floats(min_value=0.0, max_value=1.0),
)
def test_group_laws_respect_envelope_once_blended(case, d_des, alpha, beta):
    """Test raw group laws keep v in [0, v_max] and |w| <= pi, and every blend is in the envelope"""
    params, p, peer, e, ps, t = case
    # peer position stands in for the group center
    group_center = peer.position
    assume(math.hypot(e.x - group_center[0], e.y - group_center[1]) > 1e-3)
    assume(math.hypot(p.x - group_center[0], p.y - group_center[1]) > 1e-3)
    agg, sigma = aggregation_cmd(e, group_center, d_des, p, params)
    esc = escape_cmd(e, ps, p, params, t)
    joi = join_cmd(e, ps, group_center, params, t)
    assert 0.0 <= sigma <= 2.0
    for raw in (agg, esc, joi):
        assert 0.0 <= raw.v <= params.v_max + 1e-12
        assert abs(raw.w) <= math.pi + 1e-12
    assert blend_main(agg, esc, alpha, params).within(params)
    assert blend_isolated(joi, esc, beta, params).within(params)


def test_rigid_formation_gets_identical_aggregation_commands():
    """Test a formation at its initial clearances steers every member the same way"""
    params = AgentParams(v_max=0.6, w_max=2.0, r=0.2, a=0.3, c=0.05, k=1.0)
    evaders = {
        i + 1: evader_at(x, y, theta=0.0, v=0.6, agent_id=i + 1)
        for i, (x, y) in enumerate([(6.0, 0.0), (5.4, 0.8), (5.4, -0.8), (4.0, 0.4), (4.0, -0.4)])
    }
    d_des = clearances(evaders, evaders)
    c = center(evaders, evaders)
    p = pursuer_at(-16.0, 0.0)
    results = [aggregation_cmd(e, c, d_des[i], p, params) for i, e in evaders.items()]
    for cmd, sigma in results:
        assert sigma == pytest.approx(1.0)
        assert cmd.v == pytest.approx(params.v_max)
        assert cmd.w == pytest.approx(results[0][0].w, abs=1e-12)


def test_pursuer_short_multi_mirrors_target_turn(pursuer_params):
    """Test the swarm short-phase pursuer turns with its target, like the pair law"""
    p = pursuer_at(0.0, 0.0, v=0.8)
    e = evader_at(0.5, 0.2, agent_id=4)
    ps = PhaseState.initial(0.8, phase=Phase.SHORT)
    left = pursuer_short_multi(p, ps, e, pursuer_params, 1.5, 0.54, 0.0)
    right = pursuer_short_multi(p, ps, e, pursuer_params, -1.5, 0.54, 0.0)
    assert left.w > 0 > right.w
    assert left.w == -right.w
    assert left.v == right.v
    assert pursuer_short_multi(p, ps, e, pursuer_params, 1.5, 0.54, 0.0) == pursuer_short(
        p, ps, e, pursuer_params, 1.5, 0.54, 0.0
    )
