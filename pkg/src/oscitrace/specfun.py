"""Real special functions: Gamma, Euler's constant, J0, Y0 and the Struve H0.

Everything here is pure and stateless. Each function returns a
:class:`SpecialValue` carrying the value together with a conservative
absolute error bound.

Gamma uses the Lanczos approximation (g = 7, nine coefficients) with the
reflection formula below 1/2. The cylinder functions use their power series
up to ``SERIES_CUTOFF`` and Hankel-type asymptotic expansions beyond it; the
package only evaluates them at small arguments (2/lambda), so the series
branch is the one that matters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "SpecialValue",
    "gamma",
    "euler_gamma",
    "cylinder_functions",
    "EULER_GAMMA",
    "SERIES_CUTOFF",
]

EULER_GAMMA = 0.57721566490153286060651209008240243

# Above this argument the alternating power series lose more than ~4 digits
# to cancellation; switch to asymptotic expansions.
SERIES_CUTOFF = 12.0

_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_EPS = 2.220446049250313e-16


@dataclass(frozen=True)
class SpecialValue:
    value: float
    abs_error: float

    def __float__(self) -> float:
        return float(self.value)


def _lanczos_sum(x: float) -> float:
    # x here is the shifted argument (Gamma(x + 1) form)
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (x + i)
    return acc


def _gamma_pos(x: float) -> float:
    """Gamma for x >= 0.5 by Lanczos."""
    xm = x - 1.0
    t = xm + _LANCZOS_G + 0.5
    # split the power to keep t**(xm + 0.5) finite up to x ~ 170
    half = t ** (0.5 * (xm + 0.5))
    return math.sqrt(2.0 * math.pi) * half * math.exp(-t) * half * _lanczos_sum(xm)


def _lgamma_pos(x: float) -> float:
    xm = x - 1.0
    t = xm + _LANCZOS_G + 0.5
    return 0.5 * math.log(2.0 * math.pi) + (xm + 0.5) * math.log(t) - t + math.log(_lanczos_sum(xm))


def gamma(x: float, log_scale: bool = False) -> SpecialValue:
    """Gamma(x), or ln Gamma(x) for x > 0 when ``log_scale`` is set.

    Raises :class:`DomainError` at the poles 0, -1, -2, ...
    """
    x = float(x)
    if math.isnan(x):
        return SpecialValue(math.nan, math.inf)
    if x <= 0 and x == math.floor(x):
        raise DomainError(f"Gamma has a pole at x = {x:g}")
    if log_scale:
        if x <= 0:
            raise DomainError("log-scale Gamma is only provided for x > 0")
        if x >= 0.5:
            v = _lgamma_pos(x)
            return SpecialValue(v, 1e-14 * max(1.0, abs(v)))
        s = math.sin(math.pi * x)
        v = math.log(math.pi / s) - _lgamma_pos(1.0 - x)
        return SpecialValue(v, 1e-14 * max(1.0, abs(v)))
    if x >= 0.5:
        v = _gamma_pos(x)
        # Lanczos truncation ~1e-15 relative plus rounding growing with x
        rel = 4e-15 + 2.0 * _EPS * abs(x)
        return SpecialValue(v, rel * abs(v))
    s = math.sin(math.pi * x)
    v = math.pi / (s * _gamma_pos(1.0 - x))
    # reflection inherits the relative error of sin(pi x) near the poles
    dist = abs(x - round(x))
    rel = 4e-15 + 2.0 * _EPS * (abs(x) + 1.0) + _EPS / max(dist, _EPS)
    return SpecialValue(v, rel * abs(v))


def euler_gamma() -> SpecialValue:
    """Euler's constant gamma = 0.5772156649..."""
    return SpecialValue(EULER_GAMMA, 1e-17)


def _j0_series(x: float) -> tuple[float, float]:
    q = 0.25 * x * x
    term = 1.0
    total = 1.0
    biggest = 1.0
    m = 0
    while True:
        m += 1
        term *= -q / (m * m)
        total += term
        biggest = max(biggest, abs(term))
        if abs(term) < 1e-17 * max(abs(total), 1e-300) and m > 2:
            break
    return total, 8 * _EPS * biggest


def _y0_series(x: float, j0: float) -> tuple[float, float]:
    q = 0.25 * x * x
    term = 1.0
    harmonic = 0.0
    total = 0.0
    biggest = 0.0
    m = 0
    while True:
        m += 1
        term *= -q / (m * m)
        harmonic += 1.0 / m
        contrib = -term * harmonic
        total += contrib
        biggest = max(biggest, abs(contrib))
        if abs(contrib) < 1e-17 * max(abs(total), 1e-300) and m > 2:
            break
    lead = (math.log(0.5 * x) + EULER_GAMMA) * j0
    value = (2.0 / math.pi) * (lead + total)
    err = (2.0 / math.pi) * 8 * _EPS * (biggest + abs(lead) + abs(math.log(0.5 * x)))
    return value, err


def _h0_series(x: float) -> tuple[float, float]:
    half = 0.5 * x
    g = 0.5 * math.sqrt(math.pi)  # Gamma(3/2)
    term = half / (g * g)
    total = term
    biggest = abs(term)
    m = 0
    while True:
        a = m + 1.5  # Gamma(m + 5/2) = (m + 3/2) Gamma(m + 3/2)
        term *= -(half * half) / (a * a)
        total += term
        biggest = max(biggest, abs(term))
        m += 1
        if abs(term) < 1e-17 * max(abs(total), 1e-300) and m > 2:
            break
    return total, 8 * _EPS * biggest


def _hankel_pq(x: float) -> tuple[float, float, float]:
    """Asymptotic P0, Q0 with the size of the first omitted term."""
    p, q = 0.0, 0.0
    a = 1.0  # a_k(0) / x**k, sign included
    last = 1.0
    for k in range(0, 60):
        if k > 0:
            a *= -((2 * k - 1) ** 2) / (k * 8.0 * x)
        if k > 0 and abs(a) > last:
            break
        last = abs(a)
        if k % 4 == 0:
            p += a
        elif k % 4 == 1:
            q += a
        elif k % 4 == 2:
            p -= a
        else:
            q -= a
        if abs(a) < 1e-17:
            break
    return p, q, last


def _struve_minus_y0_asymptotic(x: float) -> tuple[float, float]:
    # H0 - Y0 ~ (1/pi) sum_k Gamma(k + 1/2) / Gamma(1/2 - k) (x/2)^(-2k-1)
    total = 0.0
    last = math.inf
    ratio_num = math.sqrt(math.pi)  # Gamma(1/2)
    ratio_den = math.sqrt(math.pi)
    for k in range(0, 60):
        if k > 0:
            ratio_num *= k - 0.5
            ratio_den /= 0.5 - k
        term = ratio_num / ratio_den * (0.5 * x) ** (-2 * k - 1)
        if abs(term) > last:
            break
        total += term
        last = abs(term)
        if last < 1e-17:
            break
    return total / math.pi, last / math.pi


def cylinder_functions(x: float) -> tuple[SpecialValue, SpecialValue, SpecialValue]:
    """Return (J0(x), Y0(x), H0(x)).

    Y0 is singular at the origin; for x == 0 its slot is a domain-error value
    (NaN with an infinite bound) while J0 and H0 are returned normally.
    Negative x raise :class:`DomainError`.
    """
    x = float(x)
    if x < 0:
        raise DomainError("cylinder functions are evaluated for x >= 0 only")
    if x == 0.0:
        return (
            SpecialValue(1.0, 0.0),
            SpecialValue(math.nan, math.inf),
            SpecialValue(0.0, 0.0),
        )
    if x <= SERIES_CUTOFF:
        j0, ej = _j0_series(x)
        y0, ey = _y0_series(x, j0)
        h0, eh = _h0_series(x)
        return SpecialValue(j0, ej), SpecialValue(y0, ey + ej), SpecialValue(h0, eh)
    p, q, tail = _hankel_pq(x)
    chi = x - 0.25 * math.pi
    amp = math.sqrt(2.0 / (math.pi * x))
    j0 = amp * (p * math.cos(chi) - q * math.sin(chi))
    y0 = amp * (p * math.sin(chi) + q * math.cos(chi))
    e = amp * (tail + 4 * _EPS)
    diff, ed = _struve_minus_y0_asymptotic(x)
    h0, eh = y0 + diff, e + ed
    if eh > 1e-10:
        # the Struve asymptotic series stalls near e^(-x); the series may still win
        hs, ehs = _h0_series(x)
        if ehs < eh:
            h0, eh = hs, ehs
    return SpecialValue(j0, e), SpecialValue(y0, e), SpecialValue(h0, eh)
