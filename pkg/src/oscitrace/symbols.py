"""Homogeneous polynomial symbols on R^(2n) and their geometry on the unit sphere.

Variables are ordered ``z = (x_1..x_n, xi_1..xi_n)``. Only n = 1 and n = 2
are supported.

For n = 2 every spherical integral is computed on great circles. Three
families of circles are used, the orbits of left multiplication by the
quaternion units i, j, k; each family is parametrised by a base point on S^2
(Gauss-Legendre times trapezoid) and the circle angle b, with
d(theta) = sin(eta) cos(eta) d(eta) d(phi) db. On a circle the symbol is a
trigonometric polynomial of degree k, handled exactly through its Fourier
coefficients.

Near the zero set the integrand is split between the families with weights
proportional to the squared derivative along each circle. A circle that
touches the zero set tangentially then carries (almost) no weight, which
removes the fold singularities that make single-family slicing converge
slowly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .dims import ProblemDims
from .errors import (
    ArgumentError,
    DegenerateChartError,
    PreconditionError,
    UnsupportedDimensionError,
)
from .quadrature import integrate_1d

__all__ = [
    "HomogeneousSymbol",
    "Direction",
    "ZeroSetInfo",
    "IntegralEstimate",
    "eval_and_gradient",
    "check_h4",
    "liouville_volume",
    "sphere_power_integral",
    "normal_form_jacobian",
    "re_complex_power",
    "radial_power",
    "coordinate_power",
    "hopf_point",
    "sliced_point",
    "circle_offset",
]


class IntegralEstimate(NamedTuple):
    value: float
    error_estimate: float


@dataclass(frozen=True)
class HomogeneousSymbol:
    """Sum of monomials ``coeff * prod z_i^e_i`` all of total degree ``k``."""

    k: int
    n: int
    exponents: tuple[tuple[int, ...], ...]
    coefficients: tuple[float, ...]
    _E: np.ndarray = field(init=False, repr=False, compare=False)
    _c: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ArgumentError("n must be >= 1")
        if len(self.exponents) != len(self.coefficients):
            raise ArgumentError("one coefficient per monomial")
        for e in self.exponents:
            if len(e) != 2 * self.n:
                raise ArgumentError(f"multi-index {e} has length {len(e)}, expected {2 * self.n}")
            if any(x < 0 for x in e):
                raise ArgumentError(f"negative exponent in {e}")
            if sum(e) != self.k:
                raise ArgumentError(f"monomial {e} has degree {sum(e)}, symbol degree is {self.k}")
        E = np.array(self.exponents, dtype=int).reshape(-1, 2 * self.n)
        object.__setattr__(self, "_E", E)
        object.__setattr__(self, "_c", np.array(self.coefficients, dtype=float))

    # -- construction -----------------------------------------------------

    @classmethod
    def from_records(cls, records: Iterable[dict], k: int | None = None, n: int | None = None):
        """Build from ``[{"powers": [...], "coeff": c}, ...]``, merging repeats."""
        merged: dict[tuple[int, ...], float] = {}
        for i, rec in enumerate(records):
            if not isinstance(rec, dict) or "powers" not in rec or "coeff" not in rec:
                raise ArgumentError(f"record {i} needs 'powers' and 'coeff'")
            extra = set(rec) - {"powers", "coeff"}
            if extra:
                raise ArgumentError(f"record {i} has unknown keys {sorted(extra)}")
            key = tuple(int(p) for p in rec["powers"])
            merged[key] = merged.get(key, 0.0) + float(rec["coeff"])
        if not merged:
            raise ArgumentError("symbol has no monomials")
        lens = {len(e) for e in merged}
        if len(lens) != 1 or next(iter(lens)) % 2:
            raise ArgumentError("all multi-indices need the same even length 2n")
        nn = next(iter(lens)) // 2
        degs = {sum(e) for e in merged}
        if len(degs) != 1:
            raise ArgumentError(f"symbol is not homogeneous: degrees {sorted(degs)}")
        kk = degs.pop()
        if n is not None and n != nn:
            raise ArgumentError(f"records describe n = {nn}, expected n = {n}")
        if k is not None and k != kk:
            raise ArgumentError(f"records have degree {kk}, expected k = {k}")
        keys = sorted(e for e, c in merged.items() if c != 0.0)
        if not keys:
            raise ArgumentError("all coefficients cancel")
        return cls(kk, nn, tuple(keys), tuple(merged[e] for e in keys))

    def to_records(self) -> list[dict]:
        return [{"powers": list(e), "coeff": c} for e, c in zip(self.exponents, self.coefficients)]

    @property
    def dims(self) -> ProblemDims:
        return ProblemDims(self.k, self.n)

    def __add__(self, other: "HomogeneousSymbol") -> "HomogeneousSymbol":
        if (self.k, self.n) != (other.k, other.n):
            raise ArgumentError("can only add symbols of equal degree and dimension")
        return HomogeneousSymbol.from_records(self.to_records() + other.to_records())

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return HomogeneousSymbol(self.k, self.n, self.exponents, tuple(other * c for c in self.coefficients))
        if other.n != self.n:
            raise ArgumentError("dimension mismatch")
        recs = []
        for e1, c1 in zip(self.exponents, self.coefficients):
            for e2, c2 in zip(other.exponents, other.coefficients):
                recs.append({"powers": [a + b for a, b in zip(e1, e2)], "coeff": c1 * c2})
        return HomogeneousSymbol.from_records(recs)

    __rmul__ = __mul__

    # -- evaluation -------------------------------------------------------

    def _powers(self, z):
        # table[..., i, p] = z_i^p, by repeated multiplication (pow is slow)
        P = np.empty(z.shape + (self.k + 1,))
        P[..., 0] = 1.0
        for p in range(1, self.k + 1):
            P[..., p] = P[..., p - 1] * z
        return P

    def __call__(self, z):
        z = self._check(z)
        P = self._powers(z)
        idx = np.arange(2 * self.n)
        mono = np.prod(P[..., idx, self._E], axis=-1)  # (..., M)
        return mono @ self._c

    def gradient(self, z):
        z = self._check(z)
        P = self._powers(z)
        idx = np.arange(2 * self.n)
        gathered = P[..., idx, self._E]  # (..., M, 2n)
        ones = np.ones(gathered.shape[:-1] + (1,))
        # products of the factors before and after position i
        before = np.cumprod(np.concatenate([ones, gathered[..., :-1]], axis=-1), axis=-1)
        after = np.cumprod(np.concatenate([ones, gathered[..., :0:-1]], axis=-1), axis=-1)[..., ::-1]
        deriv = self._E * P[..., idx, np.maximum(self._E - 1, 0)]
        return np.einsum("...mi,m->...i", before * after * deriv, self._c)

    def hessian(self, z):
        """Exact second derivatives, shape (..., 2n, 2n)."""
        z = self._check(z)
        P = self._powers(z)
        d = 2 * self.n
        idx = np.arange(d)
        out = np.zeros(z.shape[:-1] + (d, d))
        for i in range(d):
            for j in range(i, d):
                E = self._E.copy()
                coef = self._c * E[:, i]
                E[:, i] -= 1
                coef = coef * E[:, j]
                E[:, j] -= 1
                ok = np.all(E >= 0, axis=1) & (coef != 0)
                if not np.any(ok):
                    continue
                val = np.prod(P[..., idx, E[ok]], axis=-1) @ coef[ok]
                out[..., i, j] = val
                out[..., j, i] = val
        return out

    def hessian_vector(self, z, v):
        """Directional derivative of the gradient along ``v`` (central differences, h=1e-6)."""
        h = 1e-6
        return (self.gradient(z + h * v) - self.gradient(z - h * v)) / (2 * h)

    def _check(self, z):
        z = np.asarray(z, dtype=float)
        if z.shape[-1] != 2 * self.n:
            raise ArgumentError(f"point has {z.shape[-1]} coordinates, expected {2 * self.n}")
        return z

    def restrict_circle(self, alpha):
        """n = 1: value at (cos alpha, sin alpha)."""
        alpha = np.asarray(alpha, dtype=float)
        return self(np.stack([np.cos(alpha), np.sin(alpha)], axis=-1))

    def dalpha(self, alpha):
        """n = 1: derivative of the circle restriction."""
        alpha = np.asarray(alpha, dtype=float)
        z = np.stack([np.cos(alpha), np.sin(alpha)], axis=-1)
        g = self.gradient(z)
        return -np.sin(alpha) * g[..., 0] + np.cos(alpha) * g[..., 1]

    def tangential_gradient_norm(self, theta):
        """Norm of the sphere gradient at unit vectors ``theta``."""
        g = self.gradient(theta)
        radial = np.sum(g * theta, axis=-1)
        return np.sqrt(np.maximum(np.sum(g * g, axis=-1) - radial**2, 0.0))


def re_complex_power(k: int, scale: float = 1.0) -> HomogeneousSymbol:
    """``Re((x + i xi)^k)`` on R^2."""
    recs = []
    for j in range(k + 1):
        # Re(i^j) = 1, 0, -1, 0 for j mod 4
        r = (1, 0, -1, 0)[j % 4]
        if r:
            recs.append({"powers": [k - j, j], "coeff": scale * r * math.comb(k, j)})
    return HomogeneousSymbol.from_records(recs)


def radial_power(m: int, n: int, scale: float = 1.0) -> HomogeneousSymbol:
    """``scale * |z|^(2m)`` on R^(2n)."""
    recs = []
    d = 2 * n
    for combo in iproduct(range(m + 1), repeat=d):
        if sum(combo) != m:
            continue
        coef = math.factorial(m)
        for c in combo:
            coef //= math.factorial(c)
        recs.append({"powers": [2 * c for c in combo], "coeff": scale * coef})
    return HomogeneousSymbol.from_records(recs)


def coordinate_power(index: int, power: int, n: int, scale: float = 1.0) -> HomogeneousSymbol:
    e = [0] * (2 * n)
    e[index] = power
    return HomogeneousSymbol.from_records([{"powers": e, "coeff": scale}])


def eval_and_gradient(s: HomogeneousSymbol, z) -> tuple[float, np.ndarray]:
    z = np.asarray(z, dtype=float)
    if z.shape != (2 * s.n,):
        raise ArgumentError(f"expected a point in R^{2 * s.n}, got shape {z.shape}")
    return float(s(z)), s.gradient(z)


@dataclass(frozen=True)
class Direction:
    theta: tuple[float, ...]

    def __post_init__(self):
        if abs(math.sqrt(sum(t * t for t in self.theta)) - 1.0) > 1e-12:
            raise ArgumentError("direction must be a unit vector")

    @classmethod
    def normalized(cls, v) -> "Direction":
        v = np.asarray(v, dtype=float)
        return cls(tuple(float(x) for x in v / np.linalg.norm(v)))

    @classmethod
    def from_angle(cls, alpha: float) -> "Direction":
        return cls((math.cos(alpha), math.sin(alpha)))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.theta)


@dataclass(frozen=True)
class ZeroSetInfo:
    """Zero set of the symbol on the unit sphere.

    n = 1: ``roots`` are angles in [0, 2pi) and ``gradient_magnitudes`` the
    absolute circle derivatives there. n = 2: ``roots`` is empty,
    ``min_gradient``/``sampled_points`` summarise a great-circle scan of S^3,
    and ``shell_measures`` are the volumes of {|p| < w} for ``shell_widths``
    on a coarse rule.
    """

    k: int
    n: int
    h4_status: str  # holds | fails | empty-zero-set
    roots: tuple[float, ...] = ()
    gradient_magnitudes: tuple[float, ...] = ()
    min_gradient: float = math.inf
    sampled_points: int = 0
    sign: int = 0  # for empty zero sets: the constant sign of the symbol
    shell_widths: tuple[float, ...] = ()
    shell_measures: tuple[float, ...] = ()


# ---------------------------------------------------------------------------
# n = 1 circle machinery


def _scan_points(k: int) -> int:
    return 4 * k * 64


def _circle_roots(s: HomogeneousSymbol, shift: float = 0.0) -> list[float]:
    """Sign changes of p(alpha) - shift on a uniform scan, refined to 1e-13."""
    m = _scan_points(s.k)
    grid = np.linspace(0.0, 2 * math.pi, m + 1)
    vals = s.restrict_circle(grid) - shift
    roots = []
    f = lambda a: float(s.restrict_circle(a)) - shift
    for i in range(m):
        if vals[i] == 0.0:
            roots.append(float(grid[i]))
        elif vals[i] * vals[i + 1] < 0:
            roots.append(brentq(f, grid[i], grid[i + 1], xtol=1e-14, rtol=4 * np.finfo(float).eps))
    out = []
    for r in sorted(r % (2 * math.pi) for r in roots):
        # a root on a scan node is reported by both neighbouring cells
        if not out or r - out[-1] > 1e-12:
            out.append(r)
    if len(out) > 1 and out[0] + 2 * math.pi - out[-1] <= 1e-12:
        out.pop()
    return out


def _touching_zeros(s: HomogeneousSymbol, scale: float) -> list[float]:
    """Zeros without a sign change: local minima of |p| that reach zero."""
    m = _scan_points(s.k)
    grid = np.linspace(0.0, 2 * math.pi, m, endpoint=False)
    a = np.abs(s.restrict_circle(grid))
    found = []
    for i in range(m):
        lo, mid, hi = a[i - 1], a[i], a[(i + 1) % m]
        if mid <= lo and mid <= hi and mid < 1e-3 * scale:
            res = minimize_scalar(lambda t: abs(float(s.restrict_circle(t))),
                                  bounds=(grid[i] - 2 * math.pi / m, grid[i] + 2 * math.pi / m),
                                  method="bounded", options={"xatol": 1e-14})
            if res.fun <= 1e-9 * scale:
                found.append(float(res.x) % (2 * math.pi))
    return found


def circle_offset(s: HomogeneousSymbol, root: float, delta):
    """n = 1: p(root + delta) - p(root), accurate for |delta| far below eps.

    The circle restriction is a trigonometric polynomial of degree k; its
    coefficients are rotated to ``root`` so the angle sum is never rounded.
    """
    k = s.k
    npts = 2 * k + 1
    F = np.fft.fft(s.restrict_circle(2 * math.pi * np.arange(npts) / npts)) / npts
    C = F[: k + 1].copy()
    C[1:] *= 2.0
    m = np.arange(k + 1)
    D = C * np.exp(1j * m * root)
    md = m * np.asarray(delta, dtype=float)[..., None]
    return np.sum(-2.0 * D.real * np.sin(0.5 * md) ** 2 - D.imag * np.sin(md), axis=-1)


def _check_h4_circle(s: HomogeneousSymbol, tolerance: float) -> ZeroSetInfo:
    scale = float(np.max(np.abs(s.restrict_circle(np.linspace(0, 2 * math.pi, 257)))))
    roots = _circle_roots(s)
    touch = [t for t in _touching_zeros(s, scale) if all(abs(t - r) > 1e-6 for r in roots)]
    allr = sorted(roots + touch)
    mags = tuple(float(abs(s.dalpha(r))) for r in allr)
    if not allr:
        sign = int(np.sign(s.restrict_circle(0.0)))
        return ZeroSetInfo(s.k, 1, "empty-zero-set", sign=sign, min_gradient=math.inf)
    status = "fails" if min(mags) < tolerance else "holds"
    return ZeroSetInfo(s.k, 1, status, tuple(allr), mags, min(mags), _scan_points(s.k))


# ---------------------------------------------------------------------------
# n = 2 sliced machinery


def _qmul(p, q):
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return np.array([a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
                     a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
                     a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
                     a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2])


def _left_matrix(u):
    return np.column_stack([_qmul(u, e) for e in np.eye(4)])


def _build_families():
    """Three slicing families, one per quaternion unit i, j, k.

    Family m cuts S^3 into the great circles x(b) = cos(b) x0 + sin(b) L_m x0,
    where L_m is left multiplication by the unit. The fields L_m x form an
    orthonormal frame of every tangent space, so the squared directional
    derivatives along the three families add up to |grad_theta p|^2.
    Each family's base points are the image of one fixed section under the
    quaternion rotation that maps i to j to k.
    """
    L_i = _left_matrix((0.0, 1.0, 0.0, 0.0))
    q = np.array([0.5, 0.5, 0.5, 0.5])
    qbar = q * np.array([1.0, -1.0, -1.0, -1.0])
    cyc = np.column_stack([_qmul(_qmul(q, e), qbar) for e in np.eye(4)])
    fams = []
    P = np.eye(4)
    for _ in range(3):
        fams.append((P.copy(), P @ L_i @ P.T))
        P = cyc @ P
    return tuple(fams)


_FAMILIES = _build_families()


def hopf_point(eta, phi, b):
    """Point of S^3: z1 = cos(eta) e^(ib), z2 = sin(eta) e^(i(phi + b)), as (Re z1, Im z1, Re z2, Im z2)."""
    eta, phi, b = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (eta, phi, b)))
    ce, se = np.cos(eta), np.sin(eta)
    return np.stack([ce * np.cos(b), ce * np.sin(b), se * np.cos(phi + b), se * np.sin(phi + b)], axis=-1)


def sliced_point(eta, phi, b, family: int = 0):
    """Point of the family-``family`` great circle through the base node (eta, phi)."""
    P, _ = _FAMILIES[family]
    return hopf_point(eta, phi, b) @ P.T


@dataclass
class _SliceRule:
    """Tensor rule over the base (eta, phi): Gauss-Legendre in eta, trapezoid in phi."""

    n_eta: int
    n_phi: int

    def nodes(self):
        x, w = np.polynomial.legendre.leggauss(self.n_eta)
        eta = 0.25 * math.pi * (x + 1.0)
        w_eta = 0.25 * math.pi * w * np.sin(eta) * np.cos(eta)
        phi = 2 * math.pi * np.arange(self.n_phi) / self.n_phi
        w_phi = np.full(self.n_phi, 2 * math.pi / self.n_phi)
        E, F = np.meshgrid(eta, phi, indexing="ij")
        return E.ravel(), F.ravel(), np.outer(w_eta, w_phi).ravel()


class _Slices:
    """The symbol on a batch of great circles, as trigonometric polynomials in b.

    2k+1 equispaced samples and one FFT give the degree-k coefficients
    exactly. ``g0sq`` regularises the frame weights (see :meth:`weight`).
    """

    def __init__(self, s: HomogeneousSymbol, eta, phi, family: int, g0sq: float = 0.0):
        P, L = _FAMILIES[family]
        base = hopf_point(eta, phi, 0.0) @ P.T
        self.x0, self.v0 = base, base @ L.T
        self.s = s
        self.g0sq = g0sq
        k = s.k
        npts = 2 * k + 1
        b = 2 * math.pi * np.arange(npts) / npts
        vals = s(self.points(np.arange(eta.size)[:, None], b[None, :]))
        F = np.fft.fft(vals, axis=1) / npts
        C = F[:, : k + 1].copy()
        C[:, 1:] *= 2.0
        self.C = C
        self.m = np.arange(k + 1)
        # |grad_theta p|^2 on the circle is a trig polynomial of degree 2k
        if g0sq > 0:
            # gradient components have degree k - 1: sample at 2k - 1 points,
            # then upsample spectrally; gs2 contains p^2 and has degree 2k
            ng, mg = 2 * k - 1, 4 * k + 1
            bg = 2 * math.pi * np.arange(ng) / ng
            grad = s.gradient(self.points(np.arange(eta.size)[:, None], bg[None, :]))
            spec = np.fft.fft(grad, axis=1)
            padded = np.zeros((eta.size, mg, grad.shape[-1]), dtype=complex)
            padded[:, :k] = spec[:, :k]
            padded[:, mg - (k - 1):] = spec[:, k:]
            grad = np.fft.ifft(padded, axis=1).real * (mg / ng)
            bm = 2 * math.pi * np.arange(mg) / mg
            gs2 = np.sum(grad * grad, axis=-1) - (k * self.grid(bm)) ** 2
            G = np.fft.fft(gs2, axis=1) / mg
            self.G = G[:, : 2 * k + 1].copy()
            self.G[:, 1:] *= 2.0

    @property
    def size(self):
        return self.C.shape[0]

    def points(self, idx, b):
        b = np.asarray(b, dtype=float)[..., None]
        return np.cos(b) * self.x0[idx] + np.sin(b) * self.v0[idx]

    def grid(self, b):
        return (self.C @ np.exp(1j * np.outer(self.m, b))).real

    def at(self, idx, b):
        return _horner(self.C[idx], b)

    def slope_at(self, idx, b):
        return _horner(self.C[idx] * (1j * self.m), b)

    def weight(self, idx, b):
        """Share of this family in the partition of unity sum_m w_m = 1.

        w = ((dp/db)^2 + g0^2/3) / (|grad_theta p|^2 + g0^2). On the zero set
        it is close to the squared cosine between the circle and the gradient,
        which vanishes where the circle becomes tangent to the zero set.
        """
        gs2 = np.maximum(_horner(self.G[idx], b), 0.0)
        db = self.slope_at(idx, b)
        return (db * db + self.g0sq / 3.0) / (gs2 + self.g0sq)


def _horner(coef, b):
    """Re sum_m coef[:, m] e^(i m b) for b of shape (N,) or (N, q)."""
    b = np.asarray(b, dtype=float)
    w = np.exp(1j * b)
    c = coef if b.ndim == 1 else coef[:, None, :]
    acc = np.broadcast_to(c[..., -1], w.shape).astype(complex)
    for j in range(coef.shape[-1] - 2, -1, -1):
        acc = acc * w + c[..., j]
    return acc.real


_B_SCAN = 256
_DEFAULT_WIDTHS = (1e-2, 5e-3)


def _slice_roots(sl: _Slices, shift: float = 0.0, m: int = _B_SCAN):
    """Roots in b of p - shift on every circle: (slice_index, b_root, slope_sign), sorted.

    Sign changes on an m-point periodic scan are refined by bisection and a
    final Newton step.
    """
    b = 2 * math.pi * np.arange(m) / m
    vals = sl.grid(b) - shift
    nxt = np.roll(vals, -1, axis=1)
    si, ci = np.nonzero(vals * nxt < 0)
    lo = b[ci]
    hi = lo + 2 * math.pi / m
    flo = vals[si, ci]
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        fm = sl.at(si, mid) - shift
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
    r = 0.5 * (lo + hi)
    d = sl.slope_at(si, r)
    step = np.where(d != 0, (sl.at(si, r) - shift) / np.where(d != 0, d, 1.0), 0.0)
    r = np.where(np.abs(step) < hi - lo, r - step, r)
    slope = -np.sign(vals[si, ci])
    zi, zc = np.nonzero(vals == 0)
    if zi.size:
        zslope = np.sign(vals[zi, (zc + 1) % m] - vals[zi, zc - 1])
        si = np.concatenate([si, zi])
        r = np.concatenate([r, b[zc]])
        slope = np.concatenate([slope, zslope])
    r = np.mod(r, 2 * math.pi)
    order = np.lexsort((r, si))
    return si[order], r[order], slope[order]


_GL8 = np.polynomial.legendre.leggauss(8)
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)
_QUARTERS = np.array([0.0, 0.5, 1.0, 1.5, 2.0]) * math.pi


def _shell_functional(sl: _Slices, eps: float):
    """Per circle: integral over {|p| < eps} of this family's weight."""
    lists_i, lists_b = [], []
    for level in (eps, -eps):
        si, r, _ = _slice_roots(sl, level)
        lists_i.append(si)
        lists_b.append(r)
    n = sl.size
    fixed_i = np.repeat(np.arange(n), _QUARTERS.size)
    fixed_b = np.tile(_QUARTERS, n)
    si = np.concatenate(lists_i + [fixed_i])
    bb = np.concatenate(lists_b + [fixed_b])
    order = np.lexsort((bb, si))
    si, bb = si[order], bb[order]
    same = si[1:] == si[:-1]
    i0, lo, hi = si[:-1][same], bb[:-1][same], bb[1:][same]
    keep = hi > lo
    i0, lo, hi = i0[keep], lo[keep], hi[keep]
    inside = np.abs(sl.at(i0, 0.5 * (lo + hi))) < eps
    i0, lo, hi = i0[inside], lo[inside], hi[inside]
    out = np.zeros(n)
    if i0.size:
        x, w = _GL8
        half = 0.5 * (hi - lo)
        nodes = 0.5 * (hi + lo)[:, None] + half[:, None] * x[None, :]
        vals = sl.weight(i0, nodes) @ w * half
        np.add.at(out, i0, vals)
    return out


def _coarea_functional(sl: _Slices):
    """Per circle: sum over zeros of weight / |dp/db|, the slice form of int delta(p)."""
    si, r, _ = _slice_roots(sl)
    out = np.zeros(sl.size)
    if si.size:
        d = np.abs(sl.slope_at(si, r))
        np.add.at(out, si, sl.weight(si, r) / d)
    return out


def _arc_power_integral(sl, idx, r0, r1, expo):
    """int_{r0}^{r1} |p|^(-expo) * weight db on arcs bounded by simple roots.

    Each half arc uses b - root = h * u^(1/(1-expo)), which cancels the
    endpoint singularity.
    """
    mid = 0.5 * (r0 + r1)
    u = 0.5 * (_GL_NODES + 1.0)
    wu = 0.5 * _GL_WEIGHTS
    q = 1.0 / (1.0 - expo)
    total = np.zeros(r0.size)
    m = sl.m
    for root, h, sgn in ((r0, mid - r0, 1.0), (r1, r1 - mid, -1.0)):
        delta = sgn * h[:, None] * u[None, :] ** q
        # p(root + delta) - p(root) from the shifted coefficients, so that
        # offsets far below eps * |root| keep their relative accuracy
        D = (sl.C[idx] * np.exp(1j * m * root[:, None]))[:, None, :]
        md = m * delta[..., None]
        vals = np.abs(np.sum(-2.0 * D.real * np.sin(0.5 * md) ** 2 - D.imag * np.sin(md), axis=-1))
        bb = root[:, None] + delta
        jac = h[:, None] * q * u[None, :] ** (q - 1.0)
        with np.errstate(divide="ignore"):
            f = np.where(vals > 0, vals ** (-expo), 0.0) * jac * sl.weight(idx, bb)
        total += f @ wu
    return total


def _power_functional(sl: _Slices, expo: float, region: str, weighted: bool = True):
    """Per circle: integral of |p|^(-expo) (times the weight) over the region."""
    si, r, slope = _slice_roots(sl)
    n = sl.size
    out = np.zeros(n)
    has = np.zeros(n, dtype=bool)
    has[si] = True
    free = np.nonzero(~has)[0]
    if free.size:
        # no zero on the circle: smooth periodic integrand, trapezoid is spectral
        b = 2 * math.pi * np.arange(_B_SCAN) / _B_SCAN
        vals = sl.grid(b)[free]
        f = np.abs(vals) ** (-expo)
        if weighted:
            f = f * sl.weight(free, np.broadcast_to(b, vals.shape))
        keep = _region_mask(np.sign(vals[:, 0]), region)
        out[free] = np.where(keep, np.mean(f, axis=1) * 2 * math.pi, 0.0)
    if si.size:
        starts = np.r_[0, np.nonzero(np.diff(si))[0] + 1]
        ends = np.r_[starts[1:], si.size] - 1
        nxt = np.arange(si.size) + 1
        nxt[ends] = starts
        r1 = r[nxt].copy()
        r1[ends] += 2 * math.pi
        idx = np.nonzero(_region_mask(slope, region))[0]  # an upward crossing opens a positive arc
        if idx.size:
            np.add.at(out, si[idx], _arc_power_integral(sl, si[idx], r[idx], r1[idx], expo))
    return out


def _region_mask(sign, region):
    if region == "pos":
        return sign > 0
    if region == "neg":
        return sign < 0
    return np.ones_like(sign, dtype=bool)


def _frame_integral(s, functional, resolution, g0sq, families=(0, 1, 2), chunk=4096):
    """Sum over slicing families of the base-weighted circle functional.

    The error estimate is the change from a half-resolution rerun.
    """

    def run(ne, nphi):
        E, F, W = _SliceRule(ne, nphi).nodes()
        acc = 0.0
        for fam in families:
            for i in range(0, E.size, chunk):
                sl = _Slices(s, E[i:i + chunk], F[i:i + chunk], fam, g0sq)
                acc += float(W[i:i + chunk] @ functional(sl))
        return acc

    n_eta, n_phi = resolution
    fine = run(n_eta, n_phi)
    coarse = run(n_eta // 2, n_phi // 2)
    return IntegralEstimate(fine, abs(fine - coarse))


def _frame_g0sq(info: "ZeroSetInfo") -> float:
    # small against every gradient on the zero set, so fold tangencies carry ~1e-3 weight
    return 1e-3 * info.min_gradient**2


def _check_h4_sphere3(s: HomogeneousSymbol, tolerance: float, n_eta=48, n_phi=96) -> ZeroSetInfo:
    E, F, _ = _SliceRule(n_eta, n_phi).nodes()
    gs, count = [], 0
    sign = 0
    for fam in range(3):
        sl = _Slices(s, E, F, fam)
        si, r, _ = _slice_roots(sl)
        count += si.size
        if si.size:
            gs.append(s.tangential_gradient_norm(sl.points(si, r)))
        elif fam == 0:
            sign = int(np.sign(sl.C[0, 0].real))
    if count == 0:
        vals = s(np.random.default_rng(0).standard_normal((4096, 4)))
        if np.all(np.sign(vals) == sign):
            return ZeroSetInfo(s.k, 2, "empty-zero-set", sign=sign, min_gradient=math.inf,
                                sampled_points=3 * E.size)
    gmin = float(min(np.min(g) for g in gs)) if gs else 0.0
    status = "fails" if gmin < tolerance else "holds"
    widths, measures = (), ()
    if status == "holds":
        widths = _DEFAULT_WIDTHS
        E2, F2, W2 = _SliceRule(16, 32).nodes()
        measures = tuple(
            float(sum(W2 @ _shell_functional(_Slices(s, E2, F2, fam, 1e-3 * gmin**2), w) for fam in range(3)))
            for w in widths)
    return ZeroSetInfo(s.k, 2, status, min_gradient=gmin, sampled_points=int(count),
                       shell_widths=widths, shell_measures=measures)


# ---------------------------------------------------------------------------
# public operations


def check_h4(s: HomogeneousSymbol, tolerance: float = 1e-6) -> ZeroSetInfo:
    """Check that the gradient does not vanish on the zero set on the sphere."""
    if s.n == 1:
        return _check_h4_circle(s, tolerance)
    if s.n == 2:
        return _check_h4_sphere3(s, tolerance)
    raise UnsupportedDimensionError(f"n = {s.n}: only n in {{1, 2}} is supported")


def _require_h4(s, info=None):
    info = info or check_h4(s)
    if info.h4_status == "fails":
        raise PreconditionError(
            f"gradient vanishes on the zero set (min tangential gradient {info.min_gradient:.3g})"
        )
    return info


def liouville_volume(s: HomogeneousSymbol, method: str = "auto", widths: Sequence[float] = _DEFAULT_WIDTHS,
                     sampler: str = "deterministic", samples: int = 2**22, seed: int = 0,
                     resolution: tuple[int, int] = (48, 96)) -> IntegralEstimate:
    """Liouville measure of the zero set: integral of 1/|grad_theta p| over it.

    ``roots-1d`` (n = 1 only): sum of 1/|dp/dalpha| over the roots.
    ``thin-shell``: (2 eps)^-1 vol{|p| < eps} at two widths, Richardson
    extrapolated assuming an eps^2 bias; the error estimate is the
    extrapolation gap. For n = 2 the shell volume is computed on great
    circles (``sampler="deterministic"``) or by seeded Monte Carlo on S^3.
    ``coarea`` (n = 2 only): the same great-circle slicing applied directly
    to delta(p), with no shell width; an independent deterministic check.
    """
    info = _require_h4(s)
    if method == "auto":
        method = "roots-1d" if s.n == 1 else "thin-shell"
    if info.h4_status == "empty-zero-set":
        return IntegralEstimate(0.0, 0.0)
    if method == "roots-1d":
        if s.n != 1:
            raise UnsupportedDimensionError("roots-1d needs n = 1")
        val = float(sum(1.0 / g for g in info.gradient_magnitudes))
        # roots are refined to ~1e-14 in angle; the sum is accurate to rounding
        return IntegralEstimate(val, 1e-12 * max(1.0, val))
    if method == "coarea":
        if s.n != 2:
            raise UnsupportedDimensionError("coarea slicing is the n = 2 method")
        return _frame_integral(s, _coarea_functional, resolution, _frame_g0sq(info))
    if method != "thin-shell":
        raise ArgumentError(f"unknown Liouville method {method!r}")
    e1, e2 = (float(w) for w in widths)
    v1 = _shell_volume(s, e1, sampler, samples, seed, resolution, info) / (2 * e1)
    v2 = _shell_volume(s, e2, sampler, samples, seed, resolution, info) / (2 * e2)
    r = (e1 / e2) ** 2
    extrap = (r * v2 - v1) / (r - 1.0)
    return IntegralEstimate(extrap, abs(extrap - v2))


def _shell_volume(s, eps, sampler, samples, seed, resolution, info):
    if s.n == 1:
        return _shell_volume_circle(s, eps)
    if s.n != 2:
        raise UnsupportedDimensionError("n must be 1 or 2")
    if sampler == "monte-carlo":
        return _shell_volume_mc(s, eps, samples, seed)
    if sampler != "deterministic":
        raise ArgumentError(f"unknown sampler {sampler!r}")
    return _frame_integral(s, lambda sl: _shell_functional(sl, eps), resolution, _frame_g0sq(info)).value


def _shell_volume_circle(s, eps):
    """Exact arc length of {|p| < eps} on the circle from level crossings."""
    total = 0.0
    p0 = float(s.restrict_circle(0.0))
    for level, sgn in ((eps, 1.0), (-eps, -1.0)):
        roots = _circle_roots(s, level)
        meas = 2 * math.pi if p0 < level else 0.0
        for r in roots:
            meas += math.copysign(1.0, float(s.dalpha(r))) * r
        total += sgn * meas
    return total


def _shell_volume_mc(s, eps, samples, seed, shards=16):
    """Seeded Monte Carlo shell volume on S^3; shard results summed in fixed order."""
    children = np.random.SeedSequence(seed).spawn(shards)
    per = samples // shards
    counts = []
    for child in children:
        rng = np.random.Generator(np.random.Philox(child))
        hits = 0
        left = per
        while left:
            m = min(left, 1 << 18)
            g = rng.standard_normal((m, 4))
            th = g / np.linalg.norm(g, axis=1, keepdims=True)
            hits += int(np.count_nonzero(np.abs(s(th)) < eps))
            left -= m
        counts.append(hits)
    return 2 * math.pi**2 * sum(counts) / (per * shards)


def _circle_arcs(s: HomogeneousSymbol, roots):
    if not roots:
        return []
    ext = list(roots) + [roots[0] + 2 * math.pi]
    return list(zip(ext[:-1], ext[1:]))


def sphere_power_integral(s: HomogeneousSymbol, exponent: float, region: str = "pos",
                          tol: float = 1e-11, resolution: tuple[int, int] = (48, 96)) -> IntegralEstimate:
    """``int over {+/- p >= 0} of |p(theta)|^(-exponent) d theta`` on the unit sphere.

    Requires 0 < exponent < 1 so the integral converges across simple zeros.
    """
    if region not in ("pos", "neg", "both"):
        raise ArgumentError("region must be pos, neg or both")
    if not 0.0 < exponent < 1.0:
        raise ArgumentError(f"exponent {exponent} must lie in (0, 1)")
    info = _require_h4(s)
    return _sphere_power(s, exponent, region, info, tol, resolution)


def _sphere_power(s, exponent, region, info, tol=1e-11, resolution=(48, 96)) -> IntegralEstimate:
    if info.h4_status == "empty-zero-set":
        if region != "both" and (info.sign > 0) != (region == "pos"):
            return IntegralEstimate(0.0, 0.0)
        return _full_sphere_power(s, exponent, tol, resolution)
    if s.n == 1:
        total, err = 0.0, 0.0
        for r0, r1 in _circle_arcs(s, list(info.roots)):
            mid = 0.5 * (r0 + r1)
            sign = np.sign(s.restrict_circle(mid))
            if region == "pos" and sign < 0 or region == "neg" and sign > 0:
                continue
            for end, direction in ((r0, 1.0), (r1, -1.0)):
                f = lambda d, end=end, direction=direction: np.abs(circle_offset(s, end, direction * d)) ** (-exponent)
                res = integrate_1d(f, 0.0, 0.5 * (r1 - r0), singularity=(0.0, exponent), tol=tol)
                total += res.value
                err += res.error_estimate
        return IntegralEstimate(float(total), float(err))
    return _frame_integral(s, lambda sl: _power_functional(sl, exponent, region), resolution,
                           _frame_g0sq(info))


def _full_sphere_power(s, exponent, tol=1e-11, resolution=(48, 96)) -> IntegralEstimate:
    """Nonsingular integral of |p|^(-exponent) over the whole sphere (p nonvanishing)."""
    if s.n == 1:
        res = integrate_1d(lambda a: np.abs(s.restrict_circle(a)) ** (-exponent), 0.0, 2 * math.pi, tol=tol)
        return IntegralEstimate(float(res.value), res.error_estimate)

    # one family covers the sphere; without zeros no weighting is needed
    return _frame_integral(s, lambda sl: _power_functional(sl, exponent, "both", weighted=False),
                           resolution, 0.0, families=(0,))


def normal_form_jacobian(s: HomogeneousSymbol, theta: Direction, at_zero_set: bool = False) -> float:
    """Jacobian of the normal-form chart at r = 0.

    Off the zero set: |p(theta)|^(1/k). On it: the largest angular
    derivative, i.e. the norm of the sphere gradient (the maximum of the
    directional derivative over unit tangent vectors).
    """
    th = theta.array
    if th.size != 2 * s.n:
        raise ArgumentError("direction dimension does not match the symbol")
    val = float(s(th))
    grad = float(s.tangential_gradient_norm(th))
    if at_zero_set:
        if abs(val) >= 1e-8:
            raise PreconditionError(f"|p(theta)| = {abs(val):.3g} is not on the zero set")
        if grad < 1e-12:
            raise DegenerateChartError("symbol and its angular derivatives all vanish here")
        return grad
    if abs(val) < 1e-14 and grad < 1e-12:
        raise DegenerateChartError("symbol and its angular derivatives all vanish here")
    return abs(val) ** (1.0 / s.k)
