import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate
from scipy.special import gamma as G

from oscitrace.amplitudes import from_callable, gaussian, polynomial_gaussian
from oscitrace.errors import UnsupportedRegimeError, UnsupportedTermError
from oscitrace.residues import (QUADRANTS, ExpansionTerm, bernstein_poly, lemma52_terms, lemma53_leading,
                                lemma54_leading, leading_residue_coefficient, log_case_assembly,
                                pole_structure, residue_limit)

regimes = st.tuples(st.integers(1, 3), st.integers(0, 6)).map(lambda t: (2 * t[0] + 1 + t[1], t[0]))


# ---------------------------------------------------------------- Bernstein polynomial

def test_bernstein_examples():
    assert bernstein_poly((5, 2), Fraction(1)) == 0
    assert bernstein_poly((5, 2), Fraction(4, 5)) == 0
    assert bernstein_poly((5, 2), Fraction(0)) == 6720


def test_bernstein_exact_type_and_float_agreement():
    v = bernstein_poly((5, 2), Fraction(1, 3))
    assert isinstance(v, Fraction)
    assert float(v) == pytest.approx(bernstein_poly((5, 2), 1 / 3), rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(regimes)
def test_bernstein_roots(kn):
    k, n = kn
    for j in range(1, k + 1):
        assert bernstein_poly(kn, Fraction(j + 2 * n - 1, k)) == 0
    # the (1 - z)^2 factor: b vanishes at 1 to second order at least
    eps = Fraction(1, 10**6)
    assert bernstein_poly(kn, 1) == 0
    assert abs(bernstein_poly(kn, 1 + eps) / eps) < Fraction(1, 10**3)


# ---------------------------------------------------------------- poles

def test_pole_structure_52():
    ps = pole_structure((5, 2))
    assert ps.first_pole.location == Fraction(4, 5)
    assert ps.first_pole.analytic_order == 1
    locs = {p.location: p.root_multiplicity for p in ps.poles}
    assert locs == {Fraction(4, 5): 1, Fraction(1): 3, Fraction(6, 5): 1, Fraction(7, 5): 1, Fraction(8, 5): 1}
    assert all(p.order_is_upper_bound for p in ps.poles[1:])


def test_pole_structure_42_triple_first_pole():
    ps = pole_structure((4, 2))
    assert ps.first_pole.location == 1
    assert ps.first_pole.analytic_order == 3
    assert ps.first_pole.root_multiplicity == 3


def test_pole_structure_73():
    ps = pole_structure((7, 3))
    assert ps.first_pole.location == Fraction(6, 7)
    assert ps.first_pole.analytic_order == 1


def test_pole_structure_rejects_k_below_2n():
    with pytest.raises(UnsupportedRegimeError):
        pole_structure((3, 2))


@settings(max_examples=30, deadline=None)
@given(regimes)
def test_pole_locations_are_the_root_set(kn):
    k, n = kn
    expected = {Fraction(1)} | {Fraction(j + 2 * n - 1, k) for j in range(1, k + 1)}
    ps = pole_structure(kn)
    assert {p.location for p in ps.poles} == expected
    assert sum(p.root_multiplicity for p in ps.poles) == k + 2
    assert [p.location for p in ps.poles] == sorted(expected)


# ---------------------------------------------------------------- residue coefficient

@pytest.mark.parametrize("kn,value", [((5, 2), Fraction(5, 24)), ((7, 3), Fraction(7, 720)),
                                      ((6, 2), Fraction(-1, 80))])
def test_leading_residue_examples(kn, value):
    # (6,2): the closed form gives -6/(4*120) = -1/80
    assert leading_residue_coefficient(kn) == value


@settings(max_examples=30, deadline=None)
@given(regimes)
def test_leading_residue_matches_deflated_limit(kn):
    k, n = kn
    c = leading_residue_coefficient(kn)
    assert abs(c * (k - 2 * n) ** 2 * math.factorial(k - 1) / k) == 1
    assert c == (-1) ** k * residue_limit(kn, Fraction(2 * n, k), 1)


def test_leading_residue_rejects_log_case():
    with pytest.raises(UnsupportedRegimeError):
        leading_residue_coefficient((4, 2))


# ---------------------------------------------------------------- 2-variable terms

def _lemma52_oracle(k, j, c0, c1, sign):
    """Leading coefficient for a = (c0 + c1 chi0) e^{-chi0^2} chi1^j e^{-chi1^2}.

    The chi0 integral is a Gaussian Fourier transform; rescaling chi1 = (2/lam)^(1/k) y
    leaves Gamma-function moments of exp(-y^(2k)).
    """
    pref = math.sqrt(math.pi) * 2 ** ((j + 1) / k) / (2 * k)
    return pref * (c0 * G((j + 1) / (2 * k)) + sign * 1j * c1 * G((j + 1 + k) / (2 * k)))


@pytest.mark.parametrize("k", [3, 5, 7])
@pytest.mark.parametrize("sign", ["+", "-"])
def test_lemma52_coefficients_against_scaling_oracle(k, sign):
    for j in range(k - 1):
        a = polynomial_gaussian([[1.0, 0.7], [0.0] * j + [1.0]])
        term = lemma52_terms(k, a, sign, j)[-1]
        ref = _lemma52_oracle(k, j, 1.0, 0.7, 1 if sign == "+" else -1)
        assert term.power == Fraction(j + 1, k)
        assert term.coefficient == pytest.approx(ref, rel=1e-10)


def test_lemma52_vanishing_orders():
    a = polynomial_gaussian([[1.0], [0.0, 0.0, 1.0]])
    terms = lemma52_terms(5, a, "+", 2)
    assert terms[0].coefficient == 0 and terms[1].coefficient == 0
    assert terms[2].power == Fraction(3, 5) and abs(terms[2].coefficient) > 0.1


def test_lemma52_against_brute_force_fit():
    # a = e^{-chi0^2} chi1^2 e^{-chi1^2}; the chi0 integral is done exactly
    a = polynomial_gaussian([[1.0], [0.0, 0.0, 1.0]])
    c2 = lemma52_terms(5, a, "+", 2)[2].coefficient

    def brute(lam):
        f = lambda x: math.sqrt(math.pi) * x * x * math.exp(-x * x - 0.25 * lam * lam * x**10)
        edge = (2 / lam) ** 0.2
        return sum(integrate.quad(f, lo, hi, epsabs=0, epsrel=1e-12, limit=200)[0]
                   for lo, hi in ((0, edge), (edge, 4 * edge), (4 * edge, 12)))

    lams = np.geomspace(1e3, 1e6, 10)
    vals = np.array([brute(l) for l in lams])
    # next correction is lam^(-2/5) relative
    A = np.column_stack([lams ** -0.6, lams ** -1.0])
    coef = np.linalg.lstsq(A, vals, rcond=None)[0]
    assert coef[0] == pytest.approx(c2.real, rel=2e-2)
    alpha = -np.polyfit(np.log(lams[-4:]), np.log(vals[-4:]), 1)[0]
    assert alpha == pytest.approx(0.6, abs=2e-2)


def test_lemma52_rejects_unregularised_terms():
    with pytest.raises(UnsupportedTermError):
        lemma52_terms(5, polynomial_gaussian([[1.0], [1.0]]), "+", 4)


# ---------------------------------------------------------------- 3-variable, k > 2n

def test_lemma53_gaussian_closed_forms():
    d = lemma53_leading((5, 2), gaussian(3))
    quadrant = G(0.8) * G(0.1) ** 2 * math.cos(2 * math.pi / 5) / 5
    worked = 2 * math.pi * G(0.4) * G(1.1) / (2**0.2 * math.sqrt(math.pi))
    assert d.power == Fraction(4, 5) and d.log_power == 0
    assert d.coefficient.real == pytest.approx(quadrant, rel=1e-12)
    assert d.coefficient.real == pytest.approx(worked, rel=1e-6)
    assert d.coefficient.real == pytest.approx(6.512, abs=1e-3)
    assert d.coefficient.imag == 0


def test_lemma53_quadrature_matches_closed_form():
    for amp in (gaussian(3), polynomial_gaussian([[1, 0.5], [1, 0, 0.3], [2, -0.4]], [1, 2, 0.7])):
        a = lemma53_leading((5, 2), amp, "closed-form").coefficient
        b = lemma53_leading((5, 2), amp, "singular-quadrature").coefficient
        assert abs(a - b) <= 1e-6 * abs(a)


def test_lemma53_callable_amplitude():
    f = lambda t, r, v: np.exp(-(t * t + r * r + v * v) - 0.3 * t * v) * (1 + 0.2 * t)
    d = lemma53_leading((7, 2), from_callable(f, 3))
    s = 4 / 7
    # independent check: substitute t = u^(1/(1-s)) on each half-axis and use dblquad
    m = 1 / (1 - s)
    total = 0j
    ph = cmath.exp(1j * math.pi * 2 / 7)
    for st_, sv in QUADRANTS:
        g = lambda u, w: m * m * float(f(st_ * w**m, 0.0, sv * u**m))
        val = integrate.dblquad(g, 0, 3, 0, 3, epsabs=1e-12, epsrel=1e-11)[0]
        total += (ph if st_ * sv > 0 else ph.conjugate()) * val
    ref = G(s) / 7 * total
    assert d.coefficient == pytest.approx(ref, rel=1e-6)


@settings(max_examples=20, deadline=None)
@given(st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3))
def test_lemma53_linear_in_amplitude(c):
    a = polynomial_gaussian([[1, 0.5], [1], [2, -0.4]])
    base = lemma53_leading((5, 2), a).coefficient
    assert lemma53_leading((5, 2), a.scaled(c)).coefficient == pytest.approx(c * base, rel=1e-13)


def test_lemma53_rejects_log_case():
    with pytest.raises(UnsupportedRegimeError):
        lemma53_leading((4, 2), gaussian(3))


# ---------------------------------------------------------------- 3-variable, k = 2n

def test_lemma54_examples():
    assert lemma54_leading(1, gaussian(3)).coefficient == pytest.approx(math.pi)
    t = lemma54_leading(2, gaussian(3, scale=2.0))
    assert t.coefficient == pytest.approx(math.pi) and t.power == 1 and t.log_power == 1
    zero = polynomial_gaussian([[0.0, 1.0], [1.0], [1.0]])
    assert lemma54_leading(1, zero).coefficient == 0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_log_squared_terms_cancel(n):
    amp = polynomial_gaussian([[1, 0.5], [1, 0, 0.3], [2, -0.4]], [1, 2, 0.7])
    asm = log_case_assembly(n, amp)
    assert abs(asm.log2_plus) > 1e-3
    assert asm.log2_relative_residual <= 1e-12
    assert asm.log_from_phase == pytest.approx(lemma54_leading(n, amp).coefficient.real, rel=1e-10)


def test_log_case_residue_limit_exact():
    # triple root at z = 1 of b_{2n}; the limit is -1/(2n)!
    for n in (1, 2, 3):
        assert residue_limit((2 * n, n), Fraction(1), 3) == Fraction(-1, math.factorial(2 * n))


def test_expansion_term_validation():
    with pytest.raises(Exception):
        ExpansionTerm(1.0, Fraction(0))
    t = ExpansionTerm(2.0, Fraction(1), 1)
    assert t.evaluate(math.e) == pytest.approx(2 / math.e)
