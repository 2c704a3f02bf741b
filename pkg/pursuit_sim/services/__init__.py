from pursuit_sim.services.engine import SimTrace, run
from pursuit_sim.services.strategies import STRATEGIES, BaseStrategy

__all__ = ["SimTrace", "run", "STRATEGIES", "BaseStrategy"]
