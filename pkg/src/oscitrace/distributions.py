"""Test functions, pairings with |t|_+^(s-1) and |t|_-^(s-1), and Fourier
transforms of homogeneous distributions.

Fourier convention throughout: ``phi_hat(t) = int phi(x) exp(-i x t) dx`` and
``phi(x) = (1/2pi) int phi_hat(t) exp(i x t) dt``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ArgumentError, DivergentPairingError, DomainError, UnsupportedRegimeError
from .quadrature import integrate_1d, richardson
from .specfun import gamma

__all__ = [
    "TestFunction",
    "PairingSpec",
    "make_test_function",
    "pairing_power",
    "ft_power_identity",
    "fourier_halfline_power",
    "damped_fourier_power",
    "damped_fourier_extrapolated",
]

# phi_hat of the gaussian family is below 1e-31 beyond this many widths
_GAUSS_SUPPORT = 12.0


@dataclass(frozen=True)
class TestFunction:
    """``phi`` with compactly supported (fejer) or numerically compact (gaussian) transform.

    ``p1`` is the subprincipal shift; pairings evaluate ``phi(t + p1)``.
    """

    kind: str
    T: float
    p1: float = 0.0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.kind not in ("fejer", "gaussian"):
            raise ArgumentError(f"unknown test-function kind {self.kind!r}")
        if not self.T > 0:
            raise ArgumentError("test-function width T must be positive")

    @property
    def approximate_h3(self) -> bool:
        """True when phi_hat is only numerically compactly supported."""
        return self.kind == "gaussian"

    @property
    def support(self) -> float:
        return self.T if self.kind == "fejer" else _GAUSS_SUPPORT * self.T

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        T = self.T
        if self.kind == "gaussian":
            return self.amplitude * T / math.sqrt(2 * math.pi) * np.exp(-0.5 * (T * x) ** 2)
        u = T * x
        small = np.abs(u) < 1e-4
        safe = np.where(small, 1.0, u)
        # (1 - cos u) / u^2 = 2 sin^2(u/2) / u^2 avoids cancellation
        body = 2.0 * np.sin(0.5 * safe) ** 2 / (safe * safe)
        series = 0.5 - u * u / 24.0 + u**4 / 720.0
        return self.amplitude * T / math.pi * np.where(small, series, body)

    __call__ = phi

    def phi_hat(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "gaussian":
            return self.amplitude * np.exp(-0.5 * (t / self.T) ** 2)
        return self.amplitude * np.maximum(0.0, 1.0 - np.abs(t) / self.T)

    def shifted_phi(self, x):
        """``phi(x + p1)``."""
        return self.phi(np.asarray(x, dtype=float) + self.p1)

    def scaled(self, c: float) -> "TestFunction":
        return TestFunction(self.kind, self.T, self.p1, self.amplitude * c)


def make_test_function(kind: str = "fejer", T: float = 1.0, p1: float = 0.0) -> TestFunction:
    if not T > 0:
        raise ArgumentError("T must be positive")
    return TestFunction(kind, float(T), float(p1))


@dataclass(frozen=True)
class PairingSpec:
    """Weight ``|t|^(s-1)`` on one or both half-lines, with an extra shift.

    ``side``: ``plus`` -> int_0^inf t^(s-1) phi(t + c) dt,
    ``minus`` -> int_0^inf t^(s-1) phi(-t + c) dt, ``both`` -> sum,
    ``both-signed`` -> plus minus minus.
    """

    s: float
    side: str = "plus"
    shift: float = 0.0

    def __post_init__(self):
        if self.side not in ("plus", "minus", "both", "both-signed"):
            raise ArgumentError(f"unknown pairing side {self.side!r}")
        if not self.s > 0:
            raise DivergentPairingError(f"|t|^(s-1) with s = {self.s} is not locally integrable")


def pairing_power(phi, spec: PairingSpec, tol: float = 1e-11) -> float:
    """Pair ``phi`` with the power weight described by ``spec``.

    ``phi`` is a :class:`TestFunction` (its ``p1`` adds to ``spec.shift``) or
    any vectorised callable decaying at least like ``|x|^-2``.

    For a TestFunction the pairing is done on the Fourier side, where
    ``int_0^inf t^(s-1) e^(i t tau) dt = Gamma(s) |tau|^(-s) e^(i pi s sign(tau)/2)``
    leaves a compactly supported integral with an endpoint singularity.
    Callables are integrated directly with the substitution ``t = w^(1/s)``;
    this path needs fast (e.g. Gaussian) decay. A callable with an oscillating
    ``|x|^-2`` tail such as the Fejer kernel exhausts the evaluation budget and
    raises ConvergenceError, so pass those as TestFunction instead.
    """
    s = float(spec.s)
    if isinstance(phi, TestFunction):
        c = phi.p1 + spec.shift
        plus = _tf_half(phi, s, c, tol)
        # both families are even, so phi(-t + c) = phi(t - c)
        minus = _tf_half(phi, s, -c, tol)
    else:
        if s >= 2:
            raise ArgumentError("callable pairings need s < 2 for integrability at infinity")
        c = spec.shift
        plus = _direct_half(lambda t: phi(t + c), s, tol)
        minus = _direct_half(lambda t: phi(-t + c), s, tol)
    if spec.side == "plus":
        return plus
    if spec.side == "minus":
        return minus
    if spec.side == "both":
        return plus + minus
    return plus - minus


def _direct_half(g: Callable, s: float, tol: float) -> float:
    def f(t):
        return np.real(t ** (s - 1.0) * g(t))

    sing = (0.0, 1.0 - s) if s < 1 else None
    return float(integrate_1d(f, 0.0, math.inf, singularity=sing, tol=tol).value)


def _tf_half(phi: TestFunction, s: float, c: float, tol: float) -> float:
    if s > 1:
        raise UnsupportedRegimeError("test-function pairings are implemented for 0 < s <= 1")
    if s == 1:
        # int_c^inf phi = phi_hat(0)/2 - int_0^c phi for even phi
        head = 0.0
        if c != 0:
            lo, hi = sorted((0.0, c))
            head = math.copysign(integrate_1d(phi.phi, lo, hi, tol=tol).value, c)
        return float(phi.phi_hat(0.0)) / 2.0 - head
    W = phi.support
    g = gamma(s).value

    def f(tau):
        return phi.phi_hat(tau) * tau ** (-s) * np.cos(c * tau + 0.5 * math.pi * s)

    width = math.pi / 5 / abs(c) if c else None
    if width is None:
        res = integrate_1d(f, 0.0, W, singularity=(0.0, s), tol=tol)
    else:
        # oscillation-resolved away from the singular endpoint
        first = min(W, width)
        res = integrate_1d(f, 0.0, first, singularity=(0.0, s), tol=tol)
        if first < W:
            more = integrate_1d(f, first, W, tol=tol, max_width=width)
            res = type(res)(res.value + more.value, res.error_estimate + more.error_estimate,
                            res.evaluations + more.evaluations)
    return float(g / math.pi * res.value)


def ft_power_identity(lambda_exp: float, xi: float) -> tuple[complex, complex]:
    """Closed forms of the transforms of ``|x|^lam`` and ``|x|^lam sign(x)``.

    even = -2 sin(lam pi/2) Gamma(lam+1) |xi|^(-lam-1)
    odd  = 2i cos(lam pi/2) Gamma(lam+1) |xi|^(-lam-1) sign(xi)

    The even value holds for either kernel sign. The odd value as written is
    the transform with kernel ``exp(+i x xi)``; with this package's kernel
    ``exp(-i x xi)`` it changes sign (see :func:`fourier_halfline_power`).
    """
    lam = float(lambda_exp)
    if not -1.0 < lam < 0.0:
        raise UnsupportedRegimeError("identity implemented for -1 < lambda < 0")
    if xi == 0:
        raise DomainError("transform is singular at xi = 0")
    g = gamma(lam + 1.0).value
    mag = abs(xi) ** (-lam - 1.0)
    even = complex(-2.0 * math.sin(0.5 * lam * math.pi) * g * mag)
    odd = complex(0.0, 2.0 * math.cos(0.5 * lam * math.pi) * g * mag * math.copysign(1.0, xi))
    return even, odd


def fourier_halfline_power(lambda_exp: float, side: str, xi: float) -> complex:
    """``int x_(side)^lam exp(-i x xi) dx`` for ``side`` in {"plus", "minus"}.

    Built from :func:`ft_power_identity` via x_(+/-)^lam = (|x|^lam +/- |x|^lam sign x)/2,
    with the odd part's sign flipped to this package's kernel.
    """
    even, odd = ft_power_identity(lambda_exp, xi)
    odd_here = -odd
    if side == "plus":
        return 0.5 * (even + odd_here)
    if side == "minus":
        return 0.5 * (even - odd_here)
    raise ArgumentError("side must be 'plus' or 'minus'")


def damped_fourier_power(lambda_exp: float, xi: float, eps: float, odd: bool = False,
                         kernel_sign: int = -1, tol: float = 1e-11) -> complex:
    """``int |x|^lam [sign x] exp(kernel_sign * i x xi) exp(-eps x^2) dx`` by quadrature.

    The damping makes the integral absolutely convergent; as eps -> 0 it
    tends to the distributional transform.
    """
    lam = float(lambda_exp)
    width = math.pi / 5 / abs(xi)
    reach = math.sqrt(40.0 / eps)  # exp(-40) cutoff

    def half(f):
        first = min(width, reach)
        v = integrate_1d(f, 0.0, first, singularity=(0.0, -lam), tol=tol).value
        if first < reach:
            v += integrate_1d(f, first, reach, tol=tol, max_width=width).value
        return v

    if not odd:
        val = 2.0 * half(lambda x: x**lam * np.cos(x * xi) * np.exp(-eps * x * x))
        return complex(val)
    val = 2.0 * half(lambda x: x**lam * np.sin(x * xi) * np.exp(-eps * x * x))
    return complex(0.0, kernel_sign * val)


def damped_fourier_extrapolated(lambda_exp: float, xi: float, eps_ladder=(4e-3, 2e-3, 1e-3),
                                odd: bool = False, kernel_sign: int = -1) -> complex:
    """eps -> 0 limit of :func:`damped_fourier_power` by Richardson in eps (error ~ eps^j)."""
    vals = [damped_fourier_power(lambda_exp, xi, e, odd, kernel_sign) for e in eps_ladder]
    re = richardson(eps_ladder, [v.real for v in vals])
    im = richardson(eps_ladder, [v.imag for v in vals])
    return complex(re, im)
