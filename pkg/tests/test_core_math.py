"""
Tests for scalar control primitives
"""
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pursuit_sim.core.errors import DegenerateGeometryError, DomainError
from pursuit_sim.utils.core_math import acot_pos, rel_angle, sat, sat2, sgn_fin, sign, wrap_angle

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


def test_sat_examples():
    """Test saturation below, inside and above the band"""
    assert sat(-0.3, 1.0) == 0.0
    assert sat(0.5, 1.0) == 0.5
    assert sat(1.7, 1.0) == 1.0
    assert sat(0.0, 1.0) == 0.0  # zero maps to the lower branch


def test_sat_rejects_negative_bound():
    """Test saturation with a negative upper bound"""
    with pytest.raises(DomainError):
        sat(0.5, -1.0)


def test_sat2_examples():
    """Test floor saturation"""
    assert sat2(0.2, 0.36) == 0.36
    assert sat2(0.9, 0.36) == 0.9
    assert sat2(0.36, 0.36) == 0.36


def test_sgn_fin_examples():
    """Test both branches of the finite-time sign"""
    assert sgn_fin(0.1, 0.4444, 0.5) == pytest.approx(0.316228, abs=1e-6)
    assert sgn_fin(-0.1, 0.4444, 0.5) == pytest.approx(-0.316228, abs=1e-6)
    assert sgn_fin(2.0, 0.5, 0.5) == 0.5  # |x| > sigma^2
    assert sgn_fin(-2.0, 0.5, 0.5) == -0.5
    assert sgn_fin(0.0, 0.5, 0.5) == 0.0


def test_sgn_fin_continuous_at_threshold():
    """Test both branches agree where they meet"""
    sigma, gamma = 2.0, 0.5
    threshold = sigma ** (1.0 / gamma)
    below = sgn_fin(threshold, sigma, gamma)
    above = sgn_fin(math.nextafter(threshold, math.inf), sigma, gamma)
    assert abs(above - below) <= 1e-12


def test_sgn_fin_rejects_bad_arguments():
    """Test sgn_fin domain checks"""
    with pytest.raises(DomainError):
        sgn_fin(0.1, -1.0, 0.5)
    with pytest.raises(DomainError):
        sgn_fin(0.1, 1.0, 1.0)
    with pytest.raises(DomainError):
        sgn_fin(0.1, 1.0, 0.0)


@given(x=finite, sigma=st.floats(min_value=0.0, max_value=10.0), gamma=st.floats(min_value=0.05, max_value=0.95))
def test_sgn_fin_bounded_and_odd(x, sigma, gamma):
    """Test sgn_fin never exceeds its cap and is odd"""
    value = sgn_fin(x, sigma, gamma)
    assert abs(value) <= sigma + 1e-12
    assert sgn_fin(-x, sigma, gamma) == -value
    assert sign(value) in (sign(x), 0.0)


def test_sign():
    """Test three-valued sign"""
    assert sign(3.0) == 1.0
    assert sign(-0.1) == -1.0
    assert sign(0.0) == 0.0


def test_wrap_angle_examples():
    """Test wrapping onto (-pi, pi]"""
    assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
    assert wrap_angle(0.5) == pytest.approx(0.5)
    assert wrap_angle(-7.0) == pytest.approx(-7.0 + 2 * math.pi)


def test_wrap_angle_rejects_non_finite():
    """Test wrapping NaN and infinity"""
    with pytest.raises(DomainError):
        wrap_angle(float("nan"))
    with pytest.raises(DomainError):
        wrap_angle(float("inf"))


@given(a=finite)
def test_wrap_angle_range_and_periodicity(a):
    """Test wrapped angles lie in (-pi, pi] and differ by whole turns"""
    w = wrap_angle(a)
    assert -math.pi < w <= math.pi
    turns = (a - w) / (2 * math.pi)
    assert turns == pytest.approx(round(turns), abs=1e-6)


def test_rel_angle_examples():
    """Test four-quadrant bearings"""
    assert rel_angle((2.0, 3.0), (2.0, 2.0)) == pytest.approx(-math.pi / 2)
    assert rel_angle((0.0, 0.0), (1.0, 1.0)) == pytest.approx(math.pi / 4)
    assert rel_angle((0.0, 0.0), (-1.0, 0.0)) == pytest.approx(math.pi)
    assert rel_angle((0.0, 0.0), (-1.0, -0.0)) == math.pi  # never -pi


def test_rel_angle_coincident_points():
    """Test bearing between identical points"""
    with pytest.raises(DegenerateGeometryError):
        rel_angle((1.0, 1.0), (1.0, 1.0))


def test_acot_pos():
    """Test arc-cotangent range and a reference value"""
    assert acot_pos(2.5) == pytest.approx(0.380506, abs=1e-6)
    assert acot_pos(0.0) == pytest.approx(math.pi / 2)
    assert 0.0 < acot_pos(1e9) < 1e-8
    assert acot_pos(-1.0) == pytest.approx(3 * math.pi / 4)
