"""
Pytest configuration and fixtures
"""
import pytest

from pursuit_sim.models import Role
from pursuit_sim.schemas.agent import AgentParams, AgentState
from pursuit_sim.schemas.scenario import EngagementConfig, MultiConfig, Scenario
from pursuit_sim.services.scenario_io import parse_scenario, resolve_path
from pursuit_sim.utils.core_math import MathConfig


def pair_document(**sections) -> dict:
    """Minimal single-pair scenario document; keyword sections replace the defaults"""
    document = {
        "metadata": {"name": "pair"},
        "mode": "single",
        "agents": [
            {"role": "pursuer", "params": {"v_max": 1.2, "w_max": 1.0, "r": 0.1, "a": 0.6, "c": 0.1}},
            {"role": "evader", "params": {"v_max": 0.6, "w_max": 2.0, "r": 0.2, "a": 0.25, "c": 0.1}},
        ],
        "engagement": {"eps1": 1.4, "eps2": 0.04},
        "integration": {"dt": 0.01, "t_f": 3.0},
        "layout": {"d0": 2.5, "v_p0": 1.2, "v_e0": 0.6},
    }
    document.update(sections)
    return document


@pytest.fixture
def fig1():
    """Bundled single-pair scenario"""
    return parse_scenario(resolve_path("fig1"))


@pytest.fixture
def quick_pair():
    """Short single-pair run on a layout, cheap enough for sweeps"""
    return Scenario.model_validate(pair_document())


@pytest.fixture
def evader_params():
    """Evader envelope with a low speed floor"""
    return AgentParams(v_max=0.6, w_max=2.0, r=0.2, a=0.3, c=0.1, k=5.0)


@pytest.fixture
def pursuer_params():
    """Pursuer envelope with a high speed floor"""
    return AgentParams(v_max=1.2, w_max=1.0, r=0.1, a=0.6, c=0.3, k=5.0)


@pytest.fixture
def engagement():
    """Alert distance 1, capture radius 0.1"""
    return EngagementConfig(eps1=1.0, eps2=0.1)


@pytest.fixture
def multi_cfg():
    """Default swarm constants"""
    return MultiConfig()


@pytest.fixture
def math_cfg():
    """Square-root finite-time sign"""
    return MathConfig(gamma=0.5)


def pursuer_at(x: float, y: float, theta: float = 0.0, v: float = 0.0, agent_id: int = 0) -> AgentState:
    return AgentState(x=x, y=y, theta=theta, v=v, role=Role.PURSUER, id=agent_id)


def evader_at(x: float, y: float, theta: float = 0.0, v: float = 0.0, agent_id: int = 1) -> AgentState:
    return AgentState(x=x, y=y, theta=theta, v=v, role=Role.EVADER, id=agent_id)
