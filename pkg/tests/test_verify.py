"""
Tests for the capture-condition checker and the aggregation convergence check
"""
import math

import numpy as np
import pytest

from pursuit_sim.core.errors import DomainError
from pursuit_sim.schemas.theorem import Theorem1Inputs
from pursuit_sim.services.scenario_io import parse_scenario, resolve_path
from pursuit_sim.services.verify import (
    closed_form_error,
    closed_form_theorem1,
    integrate_mdd,
    rho_terms,
    theorem1_check,
    theorem2_reduced_ode,
    turn_horizon,
)


@pytest.fixture
def remark_inputs():
    """Bundled illustrative constants"""
    return parse_scenario(resolve_path("remark1"))


def test_remark_inputs_load(remark_inputs):
    """Test the bundled file parses as checker inputs"""
    assert isinstance(remark_inputs, Theorem1Inputs)
    assert remark_inputs.eps1 == 1.31


def test_rho_terms(remark_inputs):
    """Test both bound terms for zero accelerations"""
    rho1, rho2 = rho_terms(remark_inputs)
    assert rho1 == pytest.approx(0.4)
    assert rho2 == pytest.approx(-0.4)


def test_theorem1_bound_and_conditions(remark_inputs):
    """Test the alert-distance bound and the per-condition verdicts"""
    report = theorem1_check(remark_inputs)
    assert report.eps1_bound == pytest.approx(1.31652, abs=1e-5)
    assert report.bound_defined
    assert report.cond_i
    assert not report.cond_ii  # small steering gains fail the turn-rate condition
    assert report.cond_iii
    assert report.cond_iv
    assert report.cond_v
    assert not report.capture_asserted
    assert report.captured_by_oracle
    assert report.T_bound == pytest.approx(math.pi / 2)


def test_theorem1_undefined_bound(remark_inputs):
    """Test the bound is null when eps2 < |rho2|"""
    inputs = remark_inputs.model_copy(update={"eps2": 0.3})
    report = theorem1_check(inputs)
    assert not report.bound_defined
    assert report.eps1_bound is None
    assert not report.cond_v


def test_theorem1_inputs_reject_start_outside_alert_distance():
    """Test d0 > eps1 is refused"""
    with pytest.raises(ValueError):
        Theorem1Inputs(
            V_p=2.0, V_e=1.6, W_p_max=1.0, W_e_max=2.0, r_p=3.0, r_e=4.0,
            k_p=0.01, k_e=0.01, eps1=1.0, eps2=0.5, d0=1.5,
        )


def test_closed_form_at_quarter_turn(remark_inputs):
    """Test positions and distance at t = pi/2"""
    pursuer, evader, dist = closed_form_theorem1(math.pi / 2, remark_inputs)
    assert pursuer == pytest.approx((-2.0, 2.0))
    assert evader == pytest.approx((-1.6, 1.31))
    assert dist == pytest.approx(0.79756, abs=1e-5)
    assert dist < remark_inputs.eps2


def test_closed_form_distance_decreases_until_capture(remark_inputs):
    """Test the open-loop distance shrinks strictly through the capture radius, then reopens"""
    samples = np.linspace(0.0, turn_horizon(remark_inputs), 1000)
    distances = np.array([closed_form_theorem1(float(t), remark_inputs)[2] for t in samples])
    k_min = int(np.argmin(distances))
    assert samples[k_min] == pytest.approx(1.2154, abs=0.02)
    assert distances[k_min] == pytest.approx(0.1109, abs=2e-3)
    assert np.all(np.diff(distances[: k_min + 1]) < 0)
    crossing = int(np.argmax(distances <= remark_inputs.eps2))
    assert 0 < crossing < k_min
    assert distances[-1] > distances[k_min]
    assert distances[0] == pytest.approx(remark_inputs.d0)


def test_closed_form_rejects_times_outside_horizon(remark_inputs):
    """Test the closed form is only defined on the quarter turn"""
    with pytest.raises(DomainError):
        closed_form_theorem1(2.0, remark_inputs)
    with pytest.raises(DomainError):
        closed_form_theorem1(-0.1, remark_inputs)


def test_integrate_mdd_matches_closed_form(remark_inputs):
    """Test Euler integration tracks the closed form to 1e-3 at dt = 1e-4"""
    assert closed_form_error(remark_inputs, 1e-4) <= 1e-3


def test_integrate_mdd_first_order(remark_inputs):
    """Test the integration error halves with the step size"""
    ratio = closed_form_error(remark_inputs, 1e-3) / closed_form_error(remark_inputs, 5e-4)
    assert ratio == pytest.approx(2.0, abs=0.3)


def test_integrate_mdd_with_acceleration(remark_inputs):
    """Test the closed form also covers decaying speeds"""
    inputs = remark_inputs.model_copy(update={"a_p": 0.2, "a_e": 0.3})
    assert closed_form_error(inputs, 1e-4) <= 1e-3


def test_integrate_mdd_endpoints(remark_inputs):
    """Test sampling starts at zero and ends on the horizon"""
    traj = integrate_mdd(remark_inputs, 1e-3)
    assert traj.t[0] == 0.0
    assert traj.t[-1] == pytest.approx(math.pi / 2)
    assert traj.distance[0] == pytest.approx(remark_inputs.d0)
    with pytest.raises(DomainError):
        integrate_mdd(remark_inputs, 0.0)


@pytest.mark.parametrize("q0", [(0.1, 0.0), (3.0, 4.0)])
def test_theorem2_converges_to_desired_clearance(q0):
    """Test the reduced clearance ODE reaches d_des from inside and outside"""
    result = theorem2_reduced_ode(q0, 1.0, 50.0, 0.01)
    assert abs(result.final_norm - 1.0) < 1e-3
    assert result.lyapunov_monotone()


def test_theorem2_direction_of_lyapunov_sequence():
    """Test J decreases from outside the desired circle and increases from inside"""
    outside = theorem2_reduced_ode((3.0, 4.0), 1.0, 5.0)
    inside = theorem2_reduced_ode((0.1, 0.0), 1.0, 5.0)
    assert outside.J[-1] < outside.J[0]
    assert inside.J[-1] > inside.J[0]


def test_theorem2_rejects_bad_arguments():
    """Test non-positive clearance, horizon or step"""
    with pytest.raises(DomainError):
        theorem2_reduced_ode((1.0, 0.0), 0.0, 10.0)
    with pytest.raises(DomainError):
        theorem2_reduced_ode((1.0, 0.0), 1.0, 10.0, dt=-0.1)
