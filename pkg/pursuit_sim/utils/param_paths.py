"""
Dotted parameter paths into a dumped scenario document.

``engagement.eps1``, ``layout.d0`` and ``agents.0.params.r`` address one value.
``pursuer.<field>`` and ``evader.<field>`` address that field on every agent of
the role; a bare field name there means ``params.<field>``.
"""
from typing import Any, Dict, List

from pursuit_sim.core.errors import ConfigError
from pursuit_sim.models import Role
from pursuit_sim.schemas.scenario import AgentSpec

ROLE_PREFIXES = {Role.PURSUER.value, Role.EVADER.value}
AGENT_SPEC_FIELDS = set(AgentSpec.model_fields)


def _targets(data: Dict[str, Any], path: str) -> List[tuple]:
    """(container, remaining parts) pairs a path addresses."""
    parts = path.split(".")
    if parts[0] not in ROLE_PREFIXES:
        return [(data, parts)]
    rest = parts[1:]
    if not rest:
        raise KeyError(path)
    if rest[0] not in AGENT_SPEC_FIELDS:
        rest = ["params"] + rest
    matched = [agent for agent in data["agents"] if agent["role"] == parts[0]]
    if not matched:
        raise KeyError(parts[0])
    return [(agent, rest) for agent in matched]


def _step(node: Any, key: str) -> Any:
    if isinstance(node, list):
        return node[int(key)]
    return node[key]


def read_path(data: Dict[str, Any], path: str) -> List[Any]:
    """
    Values a path addresses (one per matched agent for role paths).

    Raises:
        ConfigError: if the path does not resolve
    """
    try:
        values = []
        for node, parts in _targets(data, path):
            for key in parts:
                node = _step(node, key)
            values.append(node)
        return values
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise ConfigError(f"parameter path '{path}' does not resolve: {e}", key=path) from e


def apply_override(data: Dict[str, Any], path: str, value: Any) -> None:
    """
    Set a path in place. Missing intermediate blocks are created; integer
    fields keep integer values.

    Raises:
        ConfigError: if the path does not resolve
    """
    try:
        for node, parts in _targets(data, path):
            for key in parts[:-1]:
                if isinstance(node, dict) and node.get(key) is None:
                    node[key] = {}
                node = _step(node, key)
            last = parts[-1]
            if not isinstance(node, dict):
                raise TypeError(f"cannot set '{last}' on a list")
            current = node.get(last)
            if isinstance(current, int) and not isinstance(current, bool) and float(value).is_integer():
                node[last] = int(value)
            else:
                node[last] = value
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise ConfigError(f"parameter path '{path}' does not resolve: {e}", key=path) from e
