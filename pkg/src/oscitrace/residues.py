"""Residue engine for monomial phases.

Covers Bernstein-Sato polynomials, pole bookkeeping, and the leading terms of
the oscillatory integrals

    int_0^inf int_R exp(+/- i lam chi0 chi1^k) a dchi0 dchi1                 (2-variable)
    int_0^inf int_R^2 exp(i lam t r^k v) a(t, r, v) dt dv r^(2n-1) dr       (3-variable)

Exact arithmetic (``fractions.Fraction``) is used wherever the inputs are rational.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

from .amplitudes import Amplitude
from .dims import ProblemDims, as_kn
from .distributions import PairingSpec, fourier_halfline_power, pairing_power
from .errors import ArgumentError, UnsupportedRegimeError, UnsupportedTermError
from .quadrature import integrate_1d
from .specfun import gamma

__all__ = [
    "Pole",
    "PoleStructure",
    "ExpansionTerm",
    "AsymptoticExpansion",
    "bernstein_poly",
    "bernstein_coefficients",
    "pole_structure",
    "leading_residue_coefficient",
    "residue_limit",
    "lemma52_terms",
    "lemma53_leading",
    "lemma54_leading",
    "LogCaseAssembly",
    "log_case_assembly",
    "QUADRANTS",
    "DELTA_DERIVATIVE_SIGN",
]

# Quadrant summation order for every four-quadrant sum (sign of t, sign of v).
QUADRANTS = ((1, 1), (-1, -1), (1, -1), (-1, 1))

# The j-th coefficient of the 2-variable expansion pairs against
# d^j a / dchi1^j (chi0, 0) with this sign per derivative order. Calibrated
# against direct quadrature for odd j (tests/test_residues.py) and frozen.
DELTA_DERIVATIVE_SIGN = 1


def _dims(dims) -> ProblemDims:
    if isinstance(dims, ProblemDims):
        return dims
    return ProblemDims(*dims)


def bernstein_poly(dims, z):
    """``b_k(z) = (1 - z)^2 prod_{j=1..k} (j - k z + 2n - 1)``.

    Exact (``Fraction``) for rational ``z``, float otherwise. Accepts a bare
    ``(k, n)`` pair so the k = 2 logarithmic case can use it.
    """
    k, n = as_kn(dims)
    if isinstance(z, Rational):
        z = Fraction(z)
        one = Fraction(1)
    else:
        z = float(z)
        one = 1.0
    out = (one - z) ** 2
    for j in range(1, k + 1):
        out *= j - k * z + 2 * n - 1
    return out


def bernstein_coefficients(dims) -> list[Fraction]:
    """Ascending exact coefficients of b_k as a polynomial in z."""
    k, n = as_kn(dims)
    coeffs = [Fraction(1), Fraction(-2), Fraction(1)]  # (1 - z)^2
    for j in range(1, k + 1):
        lin = [Fraction(j + 2 * n - 1), Fraction(-k)]
        coeffs = _polymul(coeffs, lin)
    return coeffs


def _polymul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _deflate(coeffs, root: Fraction):
    """Synthetic division by (z - root); returns (quotient, remainder)."""
    hi_first = list(reversed(coeffs))
    acc = Fraction(0)
    q = []
    for c in hi_first:
        acc = acc * root + c
        q.append(acc)
    rem = q.pop()
    return list(reversed(q)), rem


def residue_limit(dims, z0: Fraction, order: int) -> Fraction:
    """``lim_{z -> z0} (z - z0)^order / b_k(z)`` exactly.

    Raises if ``z0`` is not a root of at least that multiplicity.
    """
    coeffs = bernstein_coefficients(dims)
    for _ in range(order):
        coeffs, rem = _deflate(coeffs, Fraction(z0))
        if rem != 0:
            raise ArgumentError(f"z = {z0} is not a root of multiplicity {order}")
    val = sum(c * Fraction(z0) ** i for i, c in enumerate(coeffs))
    if val == 0:
        raise ArgumentError(f"z = {z0} has multiplicity above {order}")
    return 1 / val


@dataclass(frozen=True)
class Pole:
    location: Fraction
    root_multiplicity: int
    first: bool
    analytic_order: int | None  # contractual only for the first pole

    @property
    def order_is_upper_bound(self) -> bool:
        return not self.first


@dataclass(frozen=True)
class PoleStructure:
    dims: ProblemDims
    poles: tuple[Pole, ...]

    @property
    def first_pole(self) -> Pole:
        return self.poles[0]

    def later_powers(self, window: float) -> list[Fraction]:
        """Pole locations after the first, within ``window`` of it."""
        p0 = self.first_pole.location
        return [p.location for p in self.poles[1:] if p.location - p0 <= window]


def pole_structure(dims) -> PoleStructure:
    d = _dims(dims)
    d.require_trace_regime()
    mult: dict[Fraction, int] = {Fraction(1): 2}
    for j in range(1, d.k + 1):
        loc = Fraction(j + 2 * d.n - 1, d.k)
        mult[loc] = mult.get(loc, 0) + 1
    locs = sorted(mult)
    first_order = 1 if d.regime == "k>2n" else 3
    poles = tuple(
        Pole(loc, mult[loc], i == 0, first_order if i == 0 else None) for i, loc in enumerate(locs)
    )
    return PoleStructure(d, poles)


def leading_residue_coefficient(dims) -> Fraction:
    """``c_{k,n} = (-1)^(k+1) k / ((k - 2n)^2 (k - 1)!)`` for k > 2n."""
    d = _dims(dims)
    if d.regime != "k>2n":
        raise UnsupportedRegimeError("the simple-pole residue exists only for k > 2n; use lemma54_leading")
    k, n = d.k, d.n
    return Fraction((-1) ** (k + 1) * k, (k - 2 * n) ** 2 * math.factorial(k - 1))


@dataclass(frozen=True)
class ExpansionTerm:
    """``coefficient * lam^(-power) * log(lam)^log_power``."""

    coefficient: complex
    power: Fraction
    log_power: int = 0

    def __post_init__(self):
        if self.power <= 0:
            raise ArgumentError("expansion powers are positive")
        if self.log_power not in (0, 1, 2):
            raise ArgumentError("log power must be 0, 1 or 2")

    def evaluate(self, lam):
        lam = np.asarray(lam, dtype=float)
        return self.coefficient * lam ** (-float(self.power)) * np.log(lam) ** self.log_power


@dataclass(frozen=True)
class AsymptoticExpansion:
    terms: tuple[ExpansionTerm, ...]

    def __post_init__(self):
        ordered = tuple(sorted(self.terms, key=lambda t: (t.power, -t.log_power)))
        object.__setattr__(self, "terms", ordered)

    def evaluate(self, lam):
        return sum(t.evaluate(lam) for t in self.terms)

    @property
    def leading(self) -> ExpansionTerm:
        for t in self.terms:
            if t.coefficient != 0:
                return t
        return self.terms[0]


# ---------------------------------------------------------------------------
# 2-variable phase


def lemma52_terms(k: int, amplitude: Amplitude, sign_of_phase: str = "+", j_max: int = 0) -> list[ExpansionTerm]:
    """Terms ``c_j lam^(-(j+1)/k)``, j = 0..j_max, for the phase ``+/- chi0 chi1^k``.

    ``amplitude`` takes ``(chi0, chi1)``. The coefficient is

        c_j = (1/k)(1/j!) < F(x_-^mu), d^j a / dchi1^j (., 0) >,   mu = (j + 1 - k)/k,

    with ``x_+`` in place of ``x_-`` for the negative phase. The transform is
    evaluated at xi = +/-1 from the closed-form identities (it is homogeneous
    of degree -mu-1) and the pairing with ``|chi0|^(-(j+1)/k)`` on each half-line
    by singular quadrature.
    """
    if k < 2:
        raise ArgumentError("need k >= 2")
    if amplitude.nvars != 2:
        raise ArgumentError("the 2-variable phase needs an amplitude of (chi0, chi1)")
    if sign_of_phase not in ("+", "-"):
        raise ArgumentError("sign_of_phase must be '+' or '-'")
    side = "minus" if sign_of_phase == "+" else "plus"
    terms = []
    for j in range(j_max + 1):
        if j >= k - 1:
            raise UnsupportedTermError(
                f"term j = {j}: exponent (j+1-k)/k = {Fraction(j + 1 - k, k)} is outside (-1, 0)"
            )
        s = Fraction(j + 1, k)
        mu = float(s) - 1.0
        slice_j = amplitude.partial(1, j).restrict(1, 0.0)
        if amplitude.separable and amplitude.vanishing_order(1) > j:
            coeff = 0j
        else:
            weight = PairingSpec(1.0 - float(s), "both")
            p_pos = pairing_power(slice_j, PairingSpec(weight.s, "plus"))
            p_neg = pairing_power(slice_j, PairingSpec(weight.s, "minus"))
            f_pos = fourier_halfline_power(mu, side, 1.0)
            f_neg = fourier_halfline_power(mu, side, -1.0)
            coeff = (DELTA_DERIVATIVE_SIGN**j) * (f_pos * p_pos + f_neg * p_neg) / (k * math.factorial(j))
        terms.append(ExpansionTerm(complex(coeff), s, 0))
    return terms


# ---------------------------------------------------------------------------
# 3-variable phase, k > 2n


def _half_moment(factor, sigma: int, s: float) -> float:
    """``int_0^inf x^(-s) P(sigma x) exp(-w x^2) dx`` in closed form."""
    w = factor.width
    total = 0.0
    for m, c in enumerate(factor.poly):
        if c == 0:
            continue
        e = 0.5 * (m + 1 - s)
        total += c * sigma**m * 0.5 * w ** (-e) * gamma(e).value
    return total


def _quadrant_closed(amplitude: Amplitude, s: float) -> list[float]:
    ft, fr, fv = amplitude.factors
    base = amplitude.scale * fr.value_at(0.0)
    return [base * _half_moment(ft, st, s) * _half_moment(fv, sv, s) for st, sv in QUADRANTS]


def _quadrant_singular(amplitude: Amplitude, s: float, tol: float) -> list[float]:
    slice_tv = amplitude.restrict(1, 0.0)  # a(t, 0, v)
    out = []
    for st, sv in QUADRANTS:
        def inner(t, st=st, sv=sv):
            vals = np.empty(t.shape)
            for i, ti in enumerate(t):
                vals[i] = integrate_1d(
                    lambda v: v ** (-s) * slice_tv(np.full_like(v, st * ti), sv * v),
                    0.0, math.inf, singularity=(0.0, s), tol=tol * 0.1,
                ).value
            return t ** (-s) * vals

        out.append(integrate_1d(inner, 0.0, math.inf, singularity=(0.0, s), tol=tol).value)
    return out


def lemma53_leading(dims, amplitude: Amplitude, method: str = "auto", tol: float = 1e-10) -> ExpansionTerm:
    """Leading term ``d(a) lam^(-2n/k)`` of the 3-variable integral when k > 2n.

    ``d(a) = (1/k) Gamma(2n/k) sum_quadrants exp(+/- i pi n/k) int |t v|^(-2n/k) a(t, 0, v)``
    with ``+`` on tv > 0. ``method``: ``closed-form`` (separable amplitudes,
    Gamma-function moments), ``singular-quadrature`` (any amplitude; each
    half-axis uses the endpoint substitution), or ``auto``.
    """
    d = _dims(dims)
    if d.regime != "k>2n":
        raise UnsupportedRegimeError(f"lemma53 needs k > 2n, got k={d.k}, n={d.n}")
    if amplitude.nvars != 3:
        raise ArgumentError("the 3-variable phase needs an amplitude of (t, r, v)")
    s = 2 * d.n / d.k
    if method == "auto":
        method = "closed-form" if amplitude.separable else "singular-quadrature"
    if method == "closed-form":
        if not amplitude.separable:
            raise ArgumentError("closed-form route needs a separable amplitude")
        q = _quadrant_closed(amplitude, s)
    elif method == "singular-quadrature":
        q = _quadrant_singular(amplitude, s, tol)
    else:
        raise ArgumentError(f"unknown method {method!r}")
    ph = cmath.exp(1j * math.pi * d.n / d.k)
    total = 0j
    for (st, sv), val in zip(QUADRANTS, q):
        total += (ph if st * sv > 0 else ph.conjugate()) * val
    coeff = gamma(s).value / d.k * total
    if abs(coeff.imag) <= 1e-15 * abs(coeff):
        coeff = complex(coeff.real, 0.0)
    return ExpansionTerm(coeff, Fraction(2 * d.n, d.k), 0)


# ---------------------------------------------------------------------------
# 3-variable phase, k = 2n


def lemma54_leading(n: int, amplitude: Amplitude) -> ExpansionTerm:
    """``(pi/n) a(0,0,0) lam^-1 log(lam)`` for the phase t r^(2n) v."""
    if n < 1:
        raise ArgumentError("n must be >= 1")
    if amplitude.nvars != 3:
        raise ArgumentError("the 3-variable phase needs an amplitude of (t, r, v)")
    return ExpansionTerm(complex(math.pi / n * amplitude.value_at_origin()), Fraction(1), 1)


@dataclass(frozen=True)
class LogCaseAssembly:
    """Pieces of the triple-pole residue at z = 1 for k = 2n.

    For each phase sign, ``G`` is lim (z-1)^3/b_2n(z) * exp(+/- i pi z/2) Gamma(z),
    ``D`` the quadrant integral of r^(2n-1) d_t d_v d_r^(2n) a with the sign
    the b-identity carries on that region, and ``log2`` = -G D / 2 the
    coefficient of lam^-1 log^2(lam). ``log_from_phase`` is the summed
    lam^-1 log(lam) contribution of the exp(+/- i pi z/2) derivative.
    """

    G_plus: complex
    G_minus: complex
    D_plus: float
    D_minus: float
    log2_plus: complex
    log2_minus: complex
    log2_sum: complex
    log2_relative_residual: float
    log_from_phase: float


def _r_moment(amplitude: Amplitude, n: int) -> float:
    """``int_0^inf r^(2n-1) d^(2n) a / dr^(2n) (0, r, 0) dr`` by quadrature."""
    if amplitude.separable:
        fr = amplitude.factor(1).derivative(2 * n)
        return integrate_1d(lambda r: r ** (2 * n - 1) * fr(r), 0.0, math.inf, tol=1e-14).value
    raise ArgumentError("log-case assembly needs a separable amplitude")


def _tv_quadrant(amplitude: Amplitude, st: int, sv: int) -> float:
    ft = amplitude.factor(0).derivative(1)
    fv = amplitude.factor(2).derivative(1)
    it = integrate_1d(lambda t: ft(st * t), 0.0, math.inf, tol=1e-14).value
    iv = integrate_1d(lambda v: fv(sv * v), 0.0, math.inf, tol=1e-14).value
    return it * iv


def log_case_assembly(n: int, amplitude: Amplitude) -> LogCaseAssembly:
    lim = residue_limit((2 * n, n), Fraction(1), 3)  # exact, equals -1/(2n)!
    G_plus = complex(lim) * cmath.exp(0.5j * math.pi) * gamma(1.0).value
    G_minus = complex(lim) * cmath.exp(-0.5j * math.pi) * gamma(1.0).value
    r_part = _r_moment(amplitude, n) * amplitude.scale
    q = [_tv_quadrant(amplitude, st, sv) for st, sv in QUADRANTS]
    # (-1)^k from the integrations by parts; k = 2n is even
    D_plus = r_part * (q[0] + q[1])
    # on tv < 0 the identity d_t d_v (-tv)^(1-z) = -(1-z)^2 (-tv)^(-z) adds a sign
    D_minus = -r_part * (q[2] + q[3])
    log2_plus = -0.5 * G_plus * D_plus
    log2_minus = -0.5 * G_minus * D_minus
    total = log2_plus + log2_minus
    scale = max(abs(log2_plus), abs(log2_minus))
    resid = abs(total) / scale if scale > 0 else 0.0
    # -(1/2)(-2 log lam) d/dz exp(+/- i pi z/2) = +/- (i pi/2) log lam, per side
    phase_log = (0.5j * math.pi) * G_plus * D_plus + (-0.5j * math.pi) * G_minus * D_minus
    return LogCaseAssembly(G_plus, G_minus, D_plus, D_minus, log2_plus, log2_minus, total, resid,
                           float(phase_log.real))
