"""Smooth, rapidly decaying amplitudes for the model oscillatory integrals.

Variables are always ordered ``(chi0, chi1[, chi2])``: ``chi0`` is the time
variable ``t``, ``chi1`` the radial variable ``r`` and ``chi2`` the
transverse variable ``v`` of the three-variable normal form.

Two families are closed under differentiation and restriction:

* ``gaussian-separable``: ``scale * prod_i exp(-w_i x_i**2)``
* ``polynomial-times-gaussian``: ``scale * prod_i P_i(x_i) exp(-w_i x_i**2)``

``callable-smooth`` wraps an arbitrary vectorised function. Its derivatives
are taken by central finite differences, and it carries the half-width of
the box outside which it is treated as negligible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import ArgumentError

KINDS = ("gaussian-separable", "polynomial-times-gaussian", "callable-smooth")


@dataclass(frozen=True)
class GaussFactor:
    """One-variable factor ``poly(x) * exp(-width * x**2)``; poly coefficients ascending."""

    poly: tuple[float, ...] = (1.0,)
    width: float = 1.0

    def __post_init__(self):
        if self.width <= 0:
            raise ArgumentError("Gaussian factor width must be positive")
        if len(self.poly) == 0:
            raise ArgumentError("empty polynomial")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return P.polyval(x, self.poly) * np.exp(-self.width * x * x)

    def derivative(self, order: int = 1) -> "GaussFactor":
        c = np.asarray(self.poly, dtype=float)
        for _ in range(order):
            # d/dx [p e^{-w x^2}] = (p' - 2 w x p) e^{-w x^2}
            c = P.polysub(P.polyder(c) if len(c) > 1 else [0.0], P.polymulx(2.0 * self.width * c))
        c = np.trim_zeros(np.asarray(c, dtype=float), "b")
        if c.size == 0:
            c = np.zeros(1)
        return GaussFactor(tuple(float(v) for v in c), self.width)

    @property
    def is_pure_gaussian(self) -> bool:
        return len(self.poly) == 1

    def value_at(self, x: float) -> float:
        return float(self(np.array([x]))[0])


@dataclass(frozen=True)
class Amplitude:
    kind: str
    nvars: int
    factors: tuple[GaussFactor, ...] = ()
    scale: float = 1.0
    func: Callable | None = field(default=None, compare=False)
    box: float = 8.0
    fd_step: float = 1e-3

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ArgumentError(f"unknown amplitude kind {self.kind!r}; expected one of {KINDS}")
        if self.nvars not in (1, 2, 3):
            raise ArgumentError("amplitudes have one, two or three variables")
        if self.kind == "callable-smooth":
            if self.func is None:
                raise ArgumentError("callable-smooth amplitude needs a function")
            if self.box <= 0:
                raise ArgumentError("box half-width must be positive")
        else:
            if len(self.factors) != self.nvars:
                raise ArgumentError("need one Gaussian factor per variable")
            if self.kind == "gaussian-separable" and not all(f.is_pure_gaussian for f in self.factors):
                raise ArgumentError("gaussian-separable factors must have constant polynomials")

    @property
    def separable(self) -> bool:
        return self.kind != "callable-smooth"

    def __call__(self, *xs):
        if len(xs) != self.nvars:
            raise ArgumentError(f"amplitude takes {self.nvars} arguments, got {len(xs)}")
        if self.separable:
            out = self.scale
            for f, x in zip(self.factors, xs):
                out = out * f(x)
            return out
        return self.scale * np.asarray(self.func(*[np.asarray(x, dtype=float) for x in xs]))

    def value_at_origin(self) -> float:
        return float(np.asarray(self(*([np.zeros(1)] * self.nvars))).ravel()[0])

    def scaled(self, c: float) -> "Amplitude":
        return replace(self, scale=self.scale * c)

    def partial(self, var: int, order: int) -> "Amplitude":
        """Derivative of the given order with respect to variable ``var``."""
        if order < 0:
            raise ArgumentError("derivative order must be nonnegative")
        if order == 0:
            return self
        if self.separable:
            fs = list(self.factors)
            fs[var] = fs[var].derivative(order)
            kind = "gaussian-separable" if all(f.is_pure_gaussian for f in fs) else "polynomial-times-gaussian"
            return replace(self, factors=tuple(fs), kind=kind)
        h = self.fd_step
        base = self.func
        # central-difference stencil for the requested order, applied once
        weights = _central_weights(order)
        offsets = np.arange(len(weights)) - (len(weights) - 1) // 2

        def deriv(*xs):
            acc = 0.0
            for w, o in zip(weights, offsets):
                if w == 0:
                    continue
                shifted = list(xs)
                shifted[var] = np.asarray(xs[var], dtype=float) + o * h
                acc = acc + w * np.asarray(base(*shifted))
            return acc / h**order

        return replace(self, func=deriv)

    def restrict(self, var: int, value: float) -> "Amplitude":
        """Freeze variable ``var`` at ``value``, dropping it from the signature."""
        if self.nvars == 1:
            raise ArgumentError("cannot restrict a one-variable amplitude")
        if self.separable:
            fs = list(self.factors)
            f = fs.pop(var)
            kind = "gaussian-separable" if all(g.is_pure_gaussian for g in fs) else "polynomial-times-gaussian"
            return replace(self, factors=tuple(fs), nvars=self.nvars - 1,
                           scale=self.scale * f.value_at(value), kind=kind)
        base = self.func

        def frozen(*xs):
            full = list(xs)
            like = np.asarray(xs[0], dtype=float) if xs else np.zeros(1)
            full.insert(var, np.full_like(like, value))
            return base(*full)

        return replace(self, func=frozen, nvars=self.nvars - 1)

    def factor(self, var: int) -> GaussFactor:
        if not self.separable:
            raise ArgumentError("only separable amplitudes expose factors")
        return self.factors[var]

    def vanishing_order(self, var: int, max_order: int = 8, tol: float = 1e-12) -> int:
        """Smallest j with a nonzero j-th derivative in ``var`` on the slice var = 0.

        For separable amplitudes this reads the polynomial exactly; callable
        amplitudes are probed on a coarse grid of the remaining variables.
        """
        if self.separable:
            f = self.factors[var]
            for j in range(max_order + 1):
                if abs(f.derivative(j).value_at(0.0)) > tol * max(1.0, max(abs(c) for c in f.poly)):
                    return j
            return max_order + 1
        grid = np.linspace(-self.box / 2, self.box / 2, 7)
        for j in range(max_order + 1):
            d = self.partial(var, j).restrict(var, 0.0)
            if d.nvars == 1:
                vals = d(grid)
            else:
                mesh = np.meshgrid(*([grid] * d.nvars), indexing="ij")
                vals = d(*[m.ravel() for m in mesh])
            if np.max(np.abs(vals)) > 1e-6:
                return j
        return max_order + 1


def _central_weights(order: int) -> np.ndarray:
    """Second-order-accurate central stencil weights for d^order/dx^order."""
    half = (order + 1) // 2 + 1
    offsets = np.arange(-half, half + 1, dtype=float)
    m = len(offsets)
    # solve Vandermonde moments: sum w_i o_i^p = order! delta_{p,order}
    A = np.vander(offsets, m, increasing=True).T
    rhs = np.zeros(m)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(A, rhs)


def gaussian(nvars: int = 3, widths: float | Sequence[float] = 1.0, scale: float = 1.0) -> Amplitude:
    """``scale * exp(-sum_i w_i x_i^2)``."""
    ws = [widths] * nvars if np.isscalar(widths) else list(widths)
    return Amplitude("gaussian-separable", nvars, tuple(GaussFactor((1.0,), float(w)) for w in ws), scale)


def polynomial_gaussian(polys: Sequence[Sequence[float]], widths: float | Sequence[float] = 1.0,
                        scale: float = 1.0) -> Amplitude:
    """Separable ``scale * prod_i P_i(x_i) exp(-w_i x_i^2)`` (coefficients ascending)."""
    nv = len(polys)
    ws = [widths] * nv if np.isscalar(widths) else list(widths)
    fs = tuple(GaussFactor(tuple(float(c) for c in p), float(w)) for p, w in zip(polys, ws))
    kind = "gaussian-separable" if all(f.is_pure_gaussian for f in fs) else "polynomial-times-gaussian"
    return Amplitude(kind, nv, fs, scale)


def from_callable(func: Callable, nvars: int, box: float = 8.0, fd_step: float = 1e-3) -> Amplitude:
    return Amplitude("callable-smooth", nvars, func=func, box=box, fd_step=fd_step)


def gaussian_fourier(factor: GaussFactor, freq):
    """``int_R exp(i freq t) poly(t) exp(-w t^2) dt`` in closed form, vectorised in ``freq``.

    Uses the moment recursion I_{m+1} = (i a / 2w) I_m + (m / 2w) I_{m-1}.
    """
    a = np.asarray(freq, dtype=float)
    w = factor.width
    i0 = math.sqrt(math.pi / w) * np.exp(-a * a / (4.0 * w)) + 0j
    total = factor.poly[0] * i0
    prev, cur = None, i0
    for m in range(1, len(factor.poly)):
        nxt = (1j * a / (2.0 * w)) * cur + ((m - 1) / (2.0 * w) * prev if prev is not None else 0.0)
        prev, cur = cur, nxt
        total = total + factor.poly[m] * cur
    return total
