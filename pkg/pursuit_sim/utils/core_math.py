"""
Scalar primitives used inside every control law.

Hot-loop code: everything here works on Python floats through the ``math``
module, not numpy scalars.
"""
import math
from typing import Tuple

from pydantic import BaseModel, Field

from pursuit_sim.core.config import settings
from pursuit_sim.core.errors import DegenerateGeometryError, DomainError

Position = Tuple[float, float]

TWO_PI = 2.0 * math.pi
ANGLE_EPS = 1e-12


class MathConfig(BaseModel):
    """Exponent of the finite-time sign function"""
    model_config = {"frozen": True, "extra": "forbid"}

    gamma: float = Field(default_factory=lambda: settings.default_gamma, gt=0, lt=1)


def sat(x: float, y: float) -> float:
    """
    Saturation onto [0, y].

    Args:
        x: Value to saturate
        y: Upper bound, must be non-negative

    Returns:
        0 if x <= 0, x if 0 < x <= y, y otherwise
    """
    if y < 0:
        raise DomainError(f"sat upper bound must be non-negative, got {y}")
    if x <= 0:
        return 0.0
    if x <= y:
        return x
    return y


def sat2(x: float, y: float) -> float:
    """Floor saturation: y if x <= y, else x."""
    if x <= y:
        return y
    return x


def sgn_fin(x: float, sigma: float, gamma: float) -> float:
    """
    Finite-time sign function bounded by sigma.

    Args:
        x: Argument (typically a wrapped heading error)
        sigma: Magnitude cap, non-negative
        gamma: Exponent in (0, 1)

    Returns:
        sigma*sign(x) when |x| > sigma**(1/gamma), else sign(x)*|x|**gamma
    """
    if sigma < 0:
        raise DomainError(f"sgn_fin cap must be non-negative, got {sigma}")
    if not 0 < gamma < 1:
        raise DomainError(f"sgn_fin exponent must lie in (0, 1), got {gamma}")
    if x == 0:
        return 0.0
    magnitude = abs(x)
    # Threshold itself takes the power branch; both branches agree there
    if magnitude > sigma ** (1.0 / gamma):
        return math.copysign(sigma, x)
    return math.copysign(magnitude ** gamma, x)


def sign(x: float) -> float:
    """Three-valued sign with sign(0) = 0."""
    if x > 0:
        return 1.0
    if x < 0:
        return -1.0
    return 0.0


def wrap_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    if not math.isfinite(a):
        raise DomainError(f"cannot wrap non-finite angle {a}")
    wrapped = math.remainder(a, TWO_PI)
    # Rounding in multiples of pi lands a few ulps off the cut; those belong to +pi
    if wrapped <= -math.pi + ANGLE_EPS:
        wrapped += TWO_PI
    return min(wrapped, math.pi)


def distance(a: Position, b: Position) -> float:
    """Euclidean distance between two positions."""
    return math.hypot(b[0] - a[0], b[1] - a[1])


def rel_angle(origin: Position, target: Position) -> float:
    """
    Four-quadrant bearing of the vector origin -> target.

    Raises:
        DegenerateGeometryError: if the two points coincide
    """
    dx = target[0] - origin[0]
    dy = target[1] - origin[1]
    if dx == 0.0 and dy == 0.0:
        raise DegenerateGeometryError(f"bearing undefined for coincident points {origin}")
    angle = math.atan2(dy, dx)
    # atan2 returns -pi for (negative, -0.0); keep the half-open convention
    if angle == -math.pi:
        return math.pi
    return angle


def acot_pos(x: float) -> float:
    """Arc-cotangent with range (0, pi): pi/2 - atan(x)."""
    return math.pi / 2.0 - math.atan(x)


def steering_profile(k: float, d: float) -> float:
    """Decreasing steering magnitude used by the short-phase turn law."""
    return acot_pos(k * d)
