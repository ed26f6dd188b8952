"""Leading trace-formula coefficients and a brute-force model oracle.

Normalisation constants live in :data:`TWO_PI_FACTORS`:

* ``trace_prefactor(n) = (2 pi)^-n`` multiplies every leading coefficient;
  it is what remains of the semiclassical prefactor (2 pi h)^-n once the
  power of h has been split off into ``h_power``.
* ``t_inversion = 1 / (2 pi)`` comes from inverting the Fourier transform in
  the time variable, ``(1/2pi) int phi_hat(t) e^(itx) dt = phi(x)``.

The model oracle reports ``(lam / 2pi)^n * int phi(p1 - lam p(z)) rho(|z|) dz``,
i.e. the raw integral with the same (2 pi h)^-n prefactor and h = 1/lam, so
that its ratio to ``lam^(n - 2n/k)`` tends to the leading coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.interpolate import CubicSpline

from .dims import ProblemDims
from .distributions import PairingSpec, TestFunction, pairing_power
from .errors import (
    ArgumentError,
    BudgetError,
    PreconditionError,
    UnsupportedDimensionError,
    UnsupportedRegimeError,
)
from .quadrature import QuadratureResult, integrate_1d
from .symbols import HomogeneousSymbol, check_h4, circle_offset, liouville_volume, sphere_power_integral

__all__ = [
    "TWO_PI_FACTORS",
    "ORIENTATIONS",
    "TraceProblem",
    "TraceCoefficientReport",
    "lambda0_nonextremum",
    "lambda_logcase",
    "lambda0_extremum",
    "model_oracle",
    "smooth_cutoff",
    "model_cutoff_term",
]

TWO_PI_FACTORS = {
    "trace_prefactor": lambda n: (2 * math.pi) ** (-n),
    "t_inversion": 1.0 / (2 * math.pi),
}

# Which half-line pairing goes with the region {p > 0}.
#   oracle:  {p > 0} <-> int_0^inf t^(s-1) phi(p1 - t) dt   (minus side)
#   literal: {p > 0} <-> int_0^inf t^(s-1) phi(t + p1) dt   (plus side)
# "oracle" is what the model integral int phi(p1 - lam p(z)) dz produces
# (substitute u = lam r^k |p(theta)|); the two agree for even phi and p1 = 0.
ORIENTATIONS = ("oracle", "literal")
DEFAULT_ORIENTATION = "oracle"


def _side_for(region_sign: int, orientation: str) -> str:
    if orientation not in ORIENTATIONS:
        raise ArgumentError(f"orientation must be one of {ORIENTATIONS}")
    plus_first = orientation == "literal"
    if region_sign > 0:
        return "plus" if plus_first else "minus"
    return "minus" if plus_first else "plus"


@dataclass
class TraceProblem:
    """Symbol, dimensions and test function of one trace computation.

    ``critical_energy`` is only a label; everything is computed with the
    critical value moved to 0.
    """

    symbol: HomogeneousSymbol
    dims: ProblemDims
    test_function: TestFunction
    critical_energy: float = 0.0
    extremum_kind: str = "none"
    zero_set: object = field(default=None, repr=False)

    def __post_init__(self):
        if isinstance(self.dims, tuple):
            self.dims = ProblemDims(*self.dims)
        if (self.symbol.k, self.symbol.n) != (self.dims.k, self.dims.n):
            raise ArgumentError(
                f"symbol has (k, n) = ({self.symbol.k}, {self.symbol.n}), dims say ({self.dims.k}, {self.dims.n})")
        if self.extremum_kind not in ("none", "minimum", "maximum"):
            raise ArgumentError(f"unknown extremum kind {self.extremum_kind!r}")
        info = self.zero_set or check_h4(self.symbol)
        self.zero_set = info
        if self.extremum_kind == "none":
            if info.h4_status != "holds":
                raise PreconditionError(
                    f"non-extremal problem needs a regular zero set, got h4 status {info.h4_status!r}")
        else:
            want = 1 if self.extremum_kind == "minimum" else -1
            if info.h4_status != "empty-zero-set" or info.sign != want:
                raise PreconditionError(
                    f"a {self.extremum_kind} needs a symbol of constant sign {want:+d} on the sphere")

    @property
    def exponent(self) -> float:
        """2n/k, the power entering the pairings and the angular integrals."""
        return 2 * self.dims.n / self.dims.k


@dataclass(frozen=True)
class TraceCoefficientReport:
    """Leading coefficient, the power of h it multiplies, and its ingredients.

    ``components`` stores every number the closed formula uses, under the
    keys read by :meth:`reconstruct`.
    """

    leading_value: float
    h_power: Fraction
    log_flag: bool
    components: dict

    def reconstruct(self) -> float:
        c = self.components
        pre = TWO_PI_FACTORS["trace_prefactor"](c["n"])
        if c["formula"] == "log":
            return pre * c["phi_hat_0"] * c["liouville_volume"]
        total = c["pairing_pos"] * c["sphere_pos"] + c["pairing_neg"] * c["sphere_neg"]
        return pre * total / c["k"]


def lambda0_nonextremum(p: TraceProblem, orientation: str = DEFAULT_ORIENTATION,
                        allow_one_signed: bool = False) -> TraceCoefficientReport:
    """Leading coefficient for k > 2n at a regular (non-extremal) zero set.

    ``allow_one_signed`` lets a constant-sign symbol through so that the
    region split can be compared with :func:`lambda0_extremum`.
    """
    k, n = p.dims.k, p.dims.n
    if p.dims.regime != "k>2n":
        raise UnsupportedRegimeError(f"needs k > 2n, got k = {k}, n = {n}")
    info = p.zero_set
    if info.h4_status != "holds" and not (allow_one_signed and info.h4_status == "empty-zero-set"):
        raise PreconditionError("needs a regular zero set")
    s = p.exponent
    pair_pos = pairing_power(p.test_function, PairingSpec(s, _side_for(+1, orientation)))
    pair_neg = pairing_power(p.test_function, PairingSpec(s, _side_for(-1, orientation)))
    pos = sphere_power_integral(p.symbol, s, "pos")
    neg = sphere_power_integral(p.symbol, s, "neg")
    comps = {
        "formula": "power", "k": k, "n": n, "exponent": s, "orientation": orientation,
        "pairing_pos": pair_pos, "pairing_neg": pair_neg,
        "sphere_pos": pos.value, "sphere_neg": neg.value,
        "sphere_pos_error": pos.error_estimate, "sphere_neg_error": neg.error_estimate,
    }
    pre = TWO_PI_FACTORS["trace_prefactor"](n)
    value = pre * (pair_pos * pos.value + pair_neg * neg.value) / k
    return TraceCoefficientReport(value, Fraction(2 * n, k) - n, False, comps)


def lambda_logcase(p: TraceProblem, **liouville_options) -> TraceCoefficientReport:
    """Coefficient of h^(1-n) log h for k = 2n: (2pi)^-n phi_hat(0) LVol."""
    k, n = p.dims.k, p.dims.n
    if p.dims.regime != "k=2n":
        raise UnsupportedRegimeError(f"needs k = 2n, got k = {k}, n = {n}")
    lv = liouville_volume(p.symbol, **liouville_options)
    phi0 = float(p.test_function.phi_hat(0.0))
    comps = {"formula": "log", "k": k, "n": n, "phi_hat_0": phi0,
             "liouville_volume": lv.value, "liouville_error": lv.error_estimate}
    value = TWO_PI_FACTORS["trace_prefactor"](n) * phi0 * lv.value
    return TraceCoefficientReport(value, Fraction(1 - n), True, comps)


def lambda0_extremum(p: TraceProblem, orientation: str = DEFAULT_ORIENTATION) -> TraceCoefficientReport:
    """Leading coefficient at a minimum or maximum of the principal part.

    One half-line pairing (chosen by the sign of the symbol and the
    orientation) times the full-sphere integral of |p|^(-2n/k).
    """
    k, n = p.dims.k, p.dims.n
    if p.extremum_kind == "none":
        raise PreconditionError("problem is not marked as an extremum")
    sign = 1 if p.extremum_kind == "minimum" else -1
    s = p.exponent
    pair = pairing_power(p.test_function, PairingSpec(s, _side_for(sign, orientation)))
    full = sphere_power_integral(p.symbol, s, "pos" if sign > 0 else "neg")
    comps = {
        "formula": "power", "k": k, "n": n, "exponent": s, "orientation": orientation,
        "pairing_pos": pair if sign > 0 else 0.0, "pairing_neg": pair if sign < 0 else 0.0,
        "sphere_pos": full.value if sign > 0 else 0.0, "sphere_neg": full.value if sign < 0 else 0.0,
        "sphere_error": full.error_estimate,
    }
    value = TWO_PI_FACTORS["trace_prefactor"](n) * pair * full.value / k
    return TraceCoefficientReport(value, Fraction(2 * n, k) - n, False, comps)


# ---------------------------------------------------------------------------
# model oracle

_LAMBDA_MAX = 1e6


def smooth_cutoff(r, rho0: float):
    """C-infinity radial cutoff: 1 for r <= rho0/2, 0 for r >= rho0."""
    x = np.clip((rho0 - np.asarray(r, dtype=float)) / (0.5 * rho0), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


def _angular_rule(symbol: HomogeneousSymbol, info, s: float, nodes: int):
    """Nodes, |p| values, signs and weights |p|^-s * d(alpha) on the circle.

    Arcs between roots use the endpoint substitution, so the weights already
    contain the integrable |p|^-s singularity.
    """
    x, w = np.polynomial.legendre.leggauss(nodes)
    u, wu = 0.5 * (x + 1.0), 0.5 * w
    roots = list(info.roots)
    alphas, weights = [], []
    if not roots:
        a = 2 * math.pi * np.arange(4 * nodes) / (4 * nodes)
        alphas.append(a)
        weights.append(np.full(a.size, 2 * math.pi / a.size) * np.abs(symbol.restrict_circle(a)) ** (-s))
    else:
        q = 1.0 / (1.0 - s)
        ext = roots + [roots[0] + 2 * math.pi]
        for r0, r1 in zip(ext[:-1], ext[1:]):
            h = 0.5 * (r1 - r0)
            for root, sgn in ((r0, 1.0), (r1, -1.0)):
                delta = sgn * h * u**q
                jac = h * q * u ** (q - 1.0)
                vals = circle_offset(symbol, root, delta)
                alphas.append(vals)
                weights.append(wu * jac * np.abs(vals) ** (-s))
        vals = np.concatenate(alphas)
        return np.abs(vals), np.sign(vals), np.concatenate(weights)
    vals = symbol.restrict_circle(alphas[0])
    return np.abs(vals), np.sign(vals), weights[0]


def _cutoff_profiles(absval, sign, weight, lam, k, rho0, points=4096):
    """A+-(u) = sum of weights over {+-p > 0} times rho((u / (lam |p|))^(1/k)).

    Both are constant below the smallest u at which the cutoff reaches any
    node, and smooth in log u above it; they are tabulated on a log grid and
    interpolated by cubic splines.
    """
    u_lo = lam * float(np.min(absval)) * (0.5 * rho0) ** k
    u_hi = lam * float(np.max(absval)) * rho0**k
    grid = np.geomspace(u_lo, u_hi, points)
    out = []
    for mask in (sign > 0, sign < 0):
        pa, pw = absval[mask], weight[mask]
        table = np.empty(points)
        for i in range(0, points, 256):
            r = (grid[i:i + 256, None] / (lam * pa[None, :])) ** (1.0 / k)
            table[i:i + 256] = smooth_cutoff(r, rho0) @ pw
        spline = CubicSpline(np.log(grid), table)
        total = float(pw.sum())

        def profile(u, spline=spline, total=total):
            u = np.asarray(u, dtype=float)
            inside = u > u_lo
            val = np.full(u.shape, total)
            val[inside] = spline(np.log(np.minimum(u[inside], u_hi)))
            return val

        out.append(profile)
    return out


def model_oracle(p: TraceProblem, lam: float, rho0: float = 0.5, tol: float = 1e-8,
                 angular_nodes: int = 96) -> QuadratureResult:
    """Brute-force value of the truncated model trace integral (n = 1).

    Computes ``(lam/2pi) int phi(p1 - lam p(z)) rho(|z|) dz``; the time
    integral has already been inverted analytically. In polar coordinates
    with u = lam r^k |p(alpha)| this becomes

        (lam/2pi) (1/k) lam^(-2/k) int_0^U u^(2/k - 1) [phi(p1 - u) A+(u) + phi(p1 + u) A-(u)] du,

    where A+-(u) are angular integrals of |p|^(-2/k) against the cutoff over
    {+-p > 0}. The u-integral is adaptive; the angular rule is rerun with
    half the nodes and the change is added to the error estimate.
    """
    n, k = p.dims.n, p.dims.k
    if n != 1:
        raise UnsupportedDimensionError("the model oracle is limited to n = 1 (cost guard)")
    if not 0 < lam <= _LAMBDA_MAX:
        raise BudgetError(f"lambda = {lam:g} outside (0, {_LAMBDA_MAX:g}] (cost guard)")
    phi = p.test_function
    s = p.exponent
    width = math.pi / 5 / phi.T

    def run(nodes):
        absval, sign, weight = _angular_rule(p.symbol, p.zero_set, s, nodes)
        u_max = lam * float(np.max(absval)) * rho0**k
        a_pos, a_neg = _cutoff_profiles(absval, sign, weight, lam, k, rho0)

        def f(u):
            return u ** (s - 1.0) * (phi.shifted_phi(-u) * a_pos(u) + phi.shifted_phi(u) * a_neg(u))

        first = min(width, u_max)
        res = integrate_1d(f, 0.0, first, singularity=(0.0, 1.0 - s), tol=tol)
        val, err, evals = res.value, res.error_estimate, res.evaluations
        if first < u_max:
            more = integrate_1d(f, first, u_max, tol=tol, max_width=width)
            val, err, evals = val + more.value, err + more.error_estimate, evals + more.evaluations
        scale = (lam * TWO_PI_FACTORS["t_inversion"]) ** n * lam ** (-s) / k
        return scale * val, scale * err, evals

    v1, e1, n1 = run(angular_nodes)
    v2, _, n2 = run(max(8, angular_nodes // 2))
    return QuadratureResult(v1, e1 + abs(v1 - v2), n1 + n2)


def model_cutoff_term(p: TraceProblem, rho0: float = 0.5) -> float:
    """The cutoff-dependent lam^(n-1) term of :func:`model_oracle` (n = 1).

    For large lam, phi(p1 - lam p) ~ phi_hat(0) delta(p) / lam, so the model
    value gains ``(2pi)^-1 phi_hat(0) LVol FP int_0^inf rho(r) r^(1-k) dr``.
    The finite part of the radial integral is
    ``(rho0/2)^(2-k)/(2-k) + int_{rho0/2}^{rho0} rho(r) r^(1-k) dr``. This term
    is subleading by lam^-(1 - 2/k) but carries all of the rho0 dependence.
    """
    if p.dims.n != 1:
        raise UnsupportedDimensionError("the model oracle is limited to n = 1")
    k = p.dims.k
    half = 0.5 * rho0
    fp = half ** (2 - k) / (2 - k)
    fp += integrate_1d(lambda r: smooth_cutoff(r, rho0) * r ** (1.0 - k), half, rho0, tol=1e-12).value
    lvol = 0.0 if p.zero_set.h4_status == "empty-zero-set" else liouville_volume(p.symbol).value
    return TWO_PI_FACTORS["t_inversion"] * float(p.test_function.phi_hat(0.0)) * lvol * fp
