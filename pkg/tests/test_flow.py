import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from oscitrace.errors import ArgumentError, ChartError, DomainError
from oscitrace.flow import (FlowSystem, field_taylor_term, flow_taylor_term, generating_function,
                            harmonic_oscillator, integrate_flow, min_period, phase_structure_check,
                            radial_quartic, run_flow_suite)
from oscitrace.symbols import HomogeneousSymbol, radial_power, re_complex_power

J = np.array([[0.0, 1.0], [-1.0, 0.0]])


def quartic_plus_quintic():
    return FlowSystem.of(radial_power(2, 1), HomogeneousSymbol.from_records([{"powers": [5, 0], "coeff": 0.1}]))


def rotate(z, angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([c * z[0] + s * z[1], -s * z[0] + c * z[1]])


# ---------------------------------------------------------------- system validation

def test_quadratic_needs_override():
    with pytest.raises(ArgumentError, match="H2"):
        FlowSystem.of(radial_power(1, 1))
    assert harmonic_oscillator().k == 2


def test_parts_are_sorted_and_merged():
    q = HomogeneousSymbol.from_records([{"powers": [5, 0], "coeff": 0.1}])
    sys = FlowSystem.of(q, radial_power(2, 1), radial_power(2, 1))
    assert [p.k for p in sys.parts] == [4, 5]
    z = np.array([0.3, -0.2])
    assert sys(z) == pytest.approx(2 * 0.13**2 + 0.1 * 0.3**5, rel=1e-14)


def test_field_is_symplectic_gradient():
    sys = quartic_plus_quintic()
    z = np.array([0.2, 0.5])
    g = sys.gradient(z)
    assert np.allclose(sys.field(z), [g[1], -g[0]])


# ---------------------------------------------------------------- integration

def test_quartic_rotation_closed_form():
    z0 = np.array([0.3, 0.0])
    z = integrate_flow(radial_quartic(), z0, 5.0)
    assert np.allclose(z, rotate(z0, 4 * 0.09 * 5.0), atol=1e-8)


def test_flow_against_independent_solver():
    sys = quartic_plus_quintic()
    z0 = np.array([0.25, -0.3])
    ref = solve_ivp(lambda t, y: sys.field(y), (0, 3.0), z0, method="Radau", rtol=1e-12, atol=1e-14).y[:, -1]
    assert np.allclose(integrate_flow(sys, z0, 3.0), ref, atol=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.floats(-0.4, 0.4), st.floats(-0.4, 0.4), st.floats(-3, 3))
def test_energy_conserved(x, xi, t):
    sys = quartic_plus_quintic()
    z0 = np.array([x, xi])
    z = integrate_flow(sys, z0, t)
    assert abs(sys(z) - sys(z0)) < 1e-10


def test_time_zero_is_identity():
    z0 = np.array([[0.1, 0.2], [0.3, -0.4]])
    assert np.array_equal(integrate_flow(quartic_plus_quintic(), z0, 0.0), z0)


@settings(max_examples=10, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2))
def test_group_law(t, s):
    sys = quartic_plus_quintic()
    z0 = np.array([0.3, 0.1])
    a = integrate_flow(sys, z0, t + s, tol=1e-12)
    b = integrate_flow(sys, integrate_flow(sys, z0, s, tol=1e-12), t, tol=1e-12)
    assert np.allclose(a, b, atol=1e-8)


def test_symplectic_volume():
    sys = quartic_plus_quintic()
    z0 = np.array([0.3, -0.2])
    h = 1e-5
    img = integrate_flow(sys, np.concatenate([z0 + h * np.eye(2), z0 - h * np.eye(2)]), 2.0, tol=1e-12)
    jac = ((img[:2] - img[2:]) / (2 * h)).T
    assert np.linalg.det(jac) == pytest.approx(1.0, abs=1e-6)


def test_guard_ball_escape():
    # x^3 has x' = 0, xi' = -3x^2: xi runs off linearly
    sys = FlowSystem.of(HomogeneousSymbol.from_records([{"powers": [3, 0], "coeff": 1.0}]))
    with pytest.raises(DomainError):
        integrate_flow(sys, np.array([0.5, 0.0]), 10.0)


# ---------------------------------------------------------------- Taylor structure

def test_linear_part_is_identity():
    # |Phi_t(eps z) - eps z| = O(eps^(k-1)), so the ratio to eps vanishes like eps^(k-2)
    sys = radial_quartic()
    z = np.array([0.6, 0.8])
    eps = np.array([2.0**-3, 2.0**-5, 2.0**-7])
    dev = [np.linalg.norm(integrate_flow(sys, e * z, 1.0, tol=1e-13) - e * z) for e in eps]
    slope = np.polyfit(np.log(eps), np.log(dev), 1)[0]
    assert slope == pytest.approx(3.0, abs=0.05)


def test_quartic_cubic_term_is_t_times_field():
    sys = radial_quartic()
    t = 0.7
    m3 = flow_taylor_term(sys, 3, t)
    probes = m3.probes
    expected = np.array([t * 4 * (z @ z) * (J @ z) for z in probes])
    assert np.allclose(m3.values, expected, rtol=1e-4, atol=1e-10)
    assert np.allclose(m3.values, t * field_taylor_term(sys, 3, probes), rtol=1e-4, atol=1e-10)


def test_quartic_quadratic_term_vanishes():
    sys = radial_quartic()
    m2 = flow_taylor_term(sys, 2, 0.7)
    m3 = flow_taylor_term(sys, 3, 0.7)
    assert m2.max_norm <= 1e-6 * m3.max_norm


def test_top_term_linear_in_t():
    sys = FlowSystem.of(re_complex_power(5), radial_power(3, 1, 0.2))
    a = flow_taylor_term(sys, 4, 0.5)
    b = flow_taylor_term(sys, 4, 1.0, probes=a.probes)
    assert np.allclose(b.values, 2 * a.values, rtol=1e-6, atol=1e-12)
    for m in (2, 3):
        assert flow_taylor_term(sys, m, 1.0).max_norm <= 1e-6 * b.max_norm


# ---------------------------------------------------------------- periods

def test_harmonic_yorke_equality():
    rep = min_period(harmonic_oscillator(), 0.5)
    assert rep.yorke_bound == pytest.approx(2 * math.pi, rel=1e-9)
    assert rep.observed_min_period == pytest.approx(2 * math.pi, abs=1e-6)


def test_quartic_period_bound_and_scaling():
    a = min_period(radial_quartic(), 0.5)
    b = min_period(radial_quartic(), 0.25)
    assert a.observed_min_period == pytest.approx(2 * math.pi, rel=1e-8)
    assert a.yorke_bound <= a.observed_min_period
    # sup |J Hess| on the ball is 12 rho^2
    assert a.sup_norm == pytest.approx(12 * 0.25, rel=1e-3)
    assert b.observed_min_period / a.observed_min_period == pytest.approx(4.0, rel=1e-8)


# ---------------------------------------------------------------- generating function

def test_generating_function_at_time_zero():
    for x, eta in [(0.1, 0.2), (-0.3, 0.05)]:
        S, xi = generating_function(quartic_plus_quintic(), 0.0, x, eta)
        assert abs(S - x * eta) <= 1e-10
        assert xi == pytest.approx(eta, abs=1e-12)


def test_generating_function_harmonic_closed_form():
    # the rotation x = y cos t + eta sin t gives S in closed form
    sys = harmonic_oscillator()
    t, x, eta = 0.4, 0.2, 0.1
    S, xi = generating_function(sys, t, x, eta)
    c, s = math.cos(t), math.sin(t)
    y = (x - eta * s) / c
    expected = (2 * x * eta - (x * x + eta * eta) * s) / (2 * c)
    assert S == pytest.approx(expected, rel=1e-10)
    assert xi == pytest.approx(-y * s + eta * c, rel=1e-10)


def test_caustic_raises_chart_error():
    with pytest.raises(ChartError):
        generating_function(harmonic_oscillator(), math.pi / 2, 0.1, 0.2)


def test_phase_structure_with_quintic_part():
    pc = phase_structure_check(quartic_plus_quintic())
    assert pc.boundary_residual <= 1e-10
    assert pc.hj_residual < 1e-7
    assert 4.7 <= pc.z_exponent <= 5.3
    assert pc.t_exponent >= 1.7
    assert pc.passed()


def test_suite_passes_for_radial_quartic():
    checks = run_flow_suite(radial_quartic(), phase=False)
    failed = [c.name for c in checks if not c.passed]
    assert not failed
