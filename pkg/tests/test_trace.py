import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gamma as G

from oscitrace.distributions import PairingSpec, make_test_function, pairing_power
from oscitrace.errors import (BudgetError, PreconditionError, UnsupportedDimensionError,
                              UnsupportedRegimeError)
from oscitrace.quadrature import fit_asymptotic
from oscitrace.symbols import HomogeneousSymbol, liouville_volume, radial_power, re_complex_power
from oscitrace.trace import (ORIENTATIONS, TraceProblem, lambda0_extremum, lambda0_nonextremum,
                             lambda_logcase, model_cutoff_term, model_oracle, smooth_cutoff)


def quintic(phi=None):
    return TraceProblem(re_complex_power(5), (5, 1), phi or make_test_function("fejer", 1.0, 0.0))


def quartic_n2():
    recs = [{"powers": [4, 0, 0, 0], "coeff": 1.0}, {"powers": [0, 4, 0, 0], "coeff": 1.0},
            {"powers": [0, 0, 4, 0], "coeff": -1.0}, {"powers": [0, 0, 0, 4], "coeff": -1.0}]
    return HomogeneousSymbol.from_records(recs)


def unit_gaussian():
    # gaussian kind is T/sqrt(2pi) exp(-(Tx)^2/2); T = sqrt 2 and a sqrt(pi) factor give exp(-x^2)
    return make_test_function("gaussian", math.sqrt(2.0)).scaled(math.sqrt(math.pi))


# ---------------------------------------------------------------- k > 2n, regular zero set

def test_quintic_components():
    r = lambda0_nonextremum(quintic())
    c = r.components
    beta = math.sqrt(math.pi) * G(0.3) / G(0.8)
    assert c["sphere_pos"] == pytest.approx(beta, rel=1e-6)
    assert c["sphere_neg"] == pytest.approx(c["sphere_pos"], rel=1e-12)
    assert c["sphere_pos"] == pytest.approx(4.5544, abs=1e-4)
    assert r.h_power == pytest.approx(0.4 - 1)
    assert not r.log_flag
    # even phi with p1 = 0: the two half-line pairings coincide
    assert c["pairing_pos"] == pytest.approx(c["pairing_neg"], rel=1e-13)


def test_quintic_value_from_independent_pieces():
    # the Fejer kernel paired with t^(s-1) on one half-line is Gamma(s) cos(pi s/2) / (pi (1-s)(2-s))
    s = 0.4
    half = G(s) * math.cos(math.pi * s / 2) / (math.pi * (1 - s) * (2 - s))
    beta = math.sqrt(math.pi) * G(0.3) / G(0.8)
    expected = (2 * math.pi) ** -1 * half * 2 * beta / 5
    assert lambda0_nonextremum(quintic()).leading_value == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("orientation", ORIENTATIONS)
@pytest.mark.parametrize("p1", [0.0, 0.7])
def test_report_reconstruction(orientation, p1):
    sym = re_complex_power(6) + radial_power(3, 1, 0.5)
    p = TraceProblem(sym, (6, 1), make_test_function("fejer", 1.0, p1))
    r = lambda0_nonextremum(p, orientation)
    assert r.reconstruct() == pytest.approx(r.leading_value, rel=1e-12)


def test_odd_symbol_has_equal_regions():
    sym = HomogeneousSymbol.from_records([{"powers": [3, 0], "coeff": 1.0}, {"powers": [1, 2], "coeff": 2.0},
                                          {"powers": [0, 3], "coeff": -0.5}])
    c = lambda0_nonextremum(TraceProblem(sym, (3, 1), make_test_function())).components
    assert c["sphere_pos"] == pytest.approx(c["sphere_neg"], rel=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-1, 1))
def test_linear_in_test_function(al, be, p1):
    sym = re_complex_power(6) + radial_power(3, 1, 0.5)
    f1 = make_test_function("gaussian", 1.0, p1)
    f2 = make_test_function("gaussian", 0.6, p1)
    r1 = lambda0_nonextremum(TraceProblem(sym, (6, 1), f1))
    r2 = lambda0_nonextremum(TraceProblem(sym, (6, 1), f2))
    c = r1.components
    # the combination is paired directly as a callable, the parts on the Fourier side
    combo = lambda x: al * f1.phi(x + p1) + be * f2.phi(x + p1)
    pp = pairing_power(combo, PairingSpec(c["exponent"], "minus"))
    pn = pairing_power(combo, PairingSpec(c["exponent"], "plus"))
    direct = (pp * c["sphere_pos"] + pn * c["sphere_neg"]) / (2 * math.pi * 6)
    assert direct == pytest.approx(al * r1.leading_value + be * r2.leading_value, rel=1e-7, abs=1e-10)
    scaled = lambda0_nonextremum(TraceProblem(sym, (6, 1), f1.scaled(al))).leading_value
    assert scaled == pytest.approx(al * r1.leading_value, rel=1e-12, abs=1e-300)


def test_regime_and_precondition_errors():
    with pytest.raises(UnsupportedRegimeError):
        lambda0_nonextremum(TraceProblem(quartic_n2(), (4, 2), make_test_function()))
    with pytest.raises(PreconditionError):
        TraceProblem(radial_power(2, 1), (4, 1), make_test_function())
    with pytest.raises(PreconditionError):
        TraceProblem(re_complex_power(5), (5, 1), make_test_function(), extremum_kind="minimum")


# ---------------------------------------------------------------- extremum

def test_extremum_example_value():
    p = TraceProblem(radial_power(2, 1), (4, 1), unit_gaussian(), extremum_kind="minimum")
    r = lambda0_extremum(p)
    assert r.components["sphere_pos"] == pytest.approx(2 * math.pi, rel=1e-12)
    assert r.leading_value == pytest.approx(0.25 * 0.5 * G(0.25), rel=1e-9)
    assert r.leading_value == pytest.approx(0.45320, abs=1e-5)
    assert r.reconstruct() == pytest.approx(r.leading_value, rel=1e-12)


def test_extremum_equals_one_signed_region_split():
    for p1 in (0.0, 0.4):
        p = TraceProblem(radial_power(2, 1, 1.7), (4, 1), make_test_function("fejer", 1.0, p1),
                         extremum_kind="minimum")
        a = lambda0_extremum(p).leading_value
        b = lambda0_nonextremum(p, allow_one_signed=True)
        assert b.components["sphere_neg"] == 0.0
        assert b.leading_value == pytest.approx(a, rel=1e-10)


@pytest.mark.parametrize("orientation", ORIENTATIONS)
def test_maximum_flips_the_pairing_side(orientation):
    # phi is even, so phi(p1 + lam p) at a maximum of -p equals phi(-p1 - lam p) at a minimum of p
    mx = TraceProblem(radial_power(2, 1, -1.0), (4, 1), make_test_function("fejer", 1.0, 0.6),
                      extremum_kind="maximum")
    mn = TraceProblem(radial_power(2, 1), (4, 1), make_test_function("fejer", 1.0, -0.6),
                      extremum_kind="minimum")
    a = lambda0_extremum(mx, orientation).leading_value
    b = lambda0_extremum(mn, orientation).leading_value
    assert a == pytest.approx(b, rel=1e-10)
    asym = TraceProblem(radial_power(2, 1), (4, 1), make_test_function("fejer", 1.0, 0.6), extremum_kind="minimum")
    assert abs(lambda0_extremum(asym, orientation).leading_value - b) > 1e-3


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 20.0))
def test_extremum_scaling(c):
    phi = make_test_function("fejer", 1.0, 0.3)
    base = lambda0_extremum(TraceProblem(radial_power(2, 1), (4, 1), phi, extremum_kind="minimum"))
    sc = lambda0_extremum(TraceProblem(radial_power(2, 1, c), (4, 1), phi, extremum_kind="minimum"))
    assert sc.leading_value == pytest.approx(c ** -0.5 * base.leading_value, rel=1e-9)


# ---------------------------------------------------------------- k = 2n

def test_logcase_value():
    p = TraceProblem(quartic_n2(), (4, 2), make_test_function("fejer", 1.0, 0.0))
    r = lambda_logcase(p)
    V = liouville_volume(quartic_n2()).value
    assert r.leading_value == pytest.approx(V / (4 * math.pi**2), rel=1e-12)
    assert r.log_flag and r.h_power == -1
    assert r.reconstruct() == pytest.approx(r.leading_value, rel=1e-12)


def test_logcase_shell_widths_consistent():
    p = TraceProblem(quartic_n2(), (4, 2), make_test_function("fejer", 1.0, 0.0))
    a = lambda_logcase(p, method="thin-shell", widths=(1e-2, 5e-3)).leading_value
    b = lambda_logcase(p, method="thin-shell", widths=(2e-2, 1e-2)).leading_value
    assert a == pytest.approx(b, rel=2e-2)


def test_logcase_empty_zero_set():
    p = TraceProblem(radial_power(2, 2), (4, 2), make_test_function(), extremum_kind="minimum")
    assert lambda_logcase(p).leading_value == 0.0


# ---------------------------------------------------------------- model oracle

def test_smooth_cutoff_profile():
    r = np.linspace(0, 1, 101)
    c = smooth_cutoff(r, 0.5)
    assert np.all(c[r <= 0.25] == 1.0) and np.all(c[r >= 0.5] == 0.0)
    assert np.all(np.diff(c) <= 0)


def test_model_oracle_zero_test_function():
    p = quintic(make_test_function("fejer", 1.0, 0.0).scaled(0.0))
    assert model_oracle(p, 1e4).value == 0.0


def test_model_oracle_growth_exponent():
    p = quintic()
    lams = 10.0 ** np.arange(3.0, 6.01, 0.5)
    cut = model_cutoff_term(p)
    vals = [model_oracle(p, l).value - cut for l in lams]
    fit = fit_asymptotic(list(zip(lams, vals)))
    assert -fit.exponent == pytest.approx(0.6, abs=1e-2)


def test_model_oracle_ratio_at_1e5():
    p = quintic()
    lead = lambda0_nonextremum(p).leading_value
    raw = model_oracle(p, 1e5).value / 1e5**0.6
    assert raw == pytest.approx(lead, rel=5e-2)
    corrected = (model_oracle(p, 1e5).value - model_cutoff_term(p)) / 1e5**0.6
    assert corrected == pytest.approx(lead, rel=1e-5)


def test_orientation_arbiter():
    sym = re_complex_power(6) + radial_power(3, 1, 0.5)
    p = TraceProblem(sym, (6, 1), make_test_function("fejer", 1.0, 0.7))
    v = (model_oracle(p, 1e5).value - model_cutoff_term(p)) / 1e5 ** (1 - 1 / 3)
    oracle = lambda0_nonextremum(p, "oracle").leading_value
    literal = lambda0_nonextremum(p, "literal").leading_value
    assert v == pytest.approx(oracle, rel=1e-4)
    assert abs(v / literal - 1) > 2e-2


def test_model_oracle_cost_guards():
    with pytest.raises(BudgetError):
        model_oracle(quintic(), 1e7)
    p2 = TraceProblem(quartic_n2(), (4, 2), make_test_function())
    with pytest.raises(UnsupportedDimensionError):
        model_oracle(p2, 10.0)
