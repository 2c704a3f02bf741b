import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple


class Role(str, enum.Enum):
    """Agent role enumeration"""
    PURSUER = "pursuer"
    EVADER = "evader"


class Phase(str, enum.Enum):
    """Engagement phase of an agent"""
    LONG = "long"
    SHORT = "short"
    STOPPED = "stopped"


class SpeedBranch(str, enum.Enum):
    """Latched speed branch within one phase episode"""
    DECELERATING = "decelerating"
    ACCELERATING = "accelerating"


class AlignBranch(str, enum.Enum):
    """Pursuer long-phase alignment branch"""
    ALIGNED = "aligned"
    TURNING = "turning"


class EventKind(str, enum.Enum):
    """Trace event enumeration"""
    ALERT_ENTERED = "alert_entered"
    ALERT_EXITED = "alert_exited"
    CAPTURED = "captured"
    TARGET_SWITCHED = "target_switched"
    ISOLATED = "isolated"
    REJOINED = "rejoined"


class IntegratorEnum(str, enum.Enum):
    """Fixed-step integration scheme"""
    EULER = "euler"
    RK4 = "rk4"


class ModeEnum(str, enum.Enum):
    """Simulation mode"""
    SINGLE = "single"
    MULTI = "multi"


class SelectionRule(str, enum.Enum):
    """Pursuer target ranking rule"""
    CLOSEST_DISTANCE = "closest_distance"
    SHORTEST_PREDICTED_TIME = "shortest_predicted_time"


class PostCaptureBehavior(str, enum.Enum):
    """What the capturing pursuer does after a capture"""
    STOP = "stop"
    RETARGET = "retarget"


@dataclass(frozen=True, slots=True)
class TraceRecord:
    """One agent at one recorded step"""
    t: float
    agent_id: int
    role: Role
    x: float
    y: float
    theta: float
    v: float
    w: float
    phase: Phase
    target_id: Optional[int] = None


@dataclass(frozen=True, slots=True)
class TraceEvent:
    """A discrete event observed during a run"""
    t: float
    kind: EventKind
    agent_ids: Tuple[int, ...]


@dataclass
class TraceSummary:
    """Per-run summary: pairwise minimum distances and capture times"""
    min_distance: Dict[Tuple[int, int], float] = field(default_factory=dict)
    captured: Dict[int, bool] = field(default_factory=dict)
    capture_time: Dict[int, float] = field(default_factory=dict)
    capture_order: List[float] = field(default_factory=list)
    t_final: float = 0.0
    steps: int = 0
