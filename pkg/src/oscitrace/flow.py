"""Hamiltonian flow near a totally degenerate equilibrium at z = 0.

The field is ``x' = d_xi p``, ``xi' = -d_x p`` (so ``z' = J grad p`` with
``J = [[0, I], [-I, 0]]``). Everything is integrated with DOP853.

Checks provided here:

* Taylor terms of ``z -> Phi_t(eps z)`` by least-squares polynomial fits in eps;
* the Yorke lower bound ``2 pi / sup |d(J grad p)|`` on closed-orbit periods,
  compared with periods found from return maps;
* the n = 1 generating function ``S(t, x, eta)`` of the flow, obtained by
  shooting plus the action integral, and the scaling of
  ``S - x eta + t p_k`` in ``|z|`` and ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize, stats
from scipy.integrate import solve_ivp

from .dims import ProblemDims
from .errors import ArgumentError, ChartError, ConvergenceError, DomainError, ExtrapolationError
from .symbols import HomogeneousSymbol, radial_power

__all__ = [
    "FlowSystem",
    "TaylorSample",
    "PeriodReport",
    "PhaseCheck",
    "integrate_flow",
    "flow_taylor_term",
    "field_taylor_term",
    "min_period",
    "generating_function",
    "phase_structure_check",
    "harmonic_oscillator",
    "radial_quartic",
    "FlowCheck",
    "run_flow_suite",
]

EPS_LADDER = tuple(2.0**-j for j in range(3, 10))
GUARD_RADIUS = 1.0


@dataclass(frozen=True)
class FlowSystem:
    """``p0 - E_c`` as a sum of homogeneous parts of increasing degree.

    The lowest degree ``k`` must be at least 3. ``allow_quadratic`` admits
    k = 2 (the harmonic oscillator used to calibrate the Yorke bound) and is
    meant for that purpose only.
    """

    parts: tuple
    allow_quadratic: bool = False
    guard: float = GUARD_RADIUS

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts or not all(isinstance(p, HomogeneousSymbol) for p in parts):
            raise ArgumentError("a flow system needs at least one HomogeneousSymbol part")
        if len({p.n for p in parts}) != 1:
            raise ArgumentError("all parts must live on the same R^(2n)")
        parts = tuple(sorted(parts, key=lambda p: p.k))
        merged = []
        for p in parts:
            if merged and merged[-1].k == p.k:
                merged[-1] = merged[-1] + p
            else:
                merged.append(p)
        low = merged[0].k
        if low < 2 or (low == 2 and not self.allow_quadratic):
            raise ArgumentError(
                f"lowest degree {low} violates hypothesis (H2): the equilibrium must be "
                "totally degenerate (k > 2)")
        if not self.guard > 0:
            raise ArgumentError("guard radius must be positive")
        object.__setattr__(self, "parts", tuple(merged))

    @classmethod
    def of(cls, *parts, **kw) -> "FlowSystem":
        return cls(tuple(parts), **kw)

    @property
    def n(self) -> int:
        return self.parts[0].n

    @property
    def k(self) -> int:
        return self.parts[0].k

    @property
    def principal(self) -> HomogeneousSymbol:
        return self.parts[0]

    @property
    def dims(self) -> ProblemDims | tuple:
        if self.k == 2:
            return (2, self.n)
        return ProblemDims(self.k, self.n)

    def __call__(self, z):
        return sum(p(z) for p in self.parts)

    def gradient(self, z):
        return sum(p.gradient(z) for p in self.parts)

    def hessian(self, z):
        return sum(p.hessian(z) for p in self.parts)

    def field(self, z):
        g = self.gradient(z)
        n = self.n
        return np.concatenate([g[..., n:], -g[..., :n]], axis=-1)

    def field_jacobian(self, z):
        """``J Hess p``, the derivative of the field."""
        H = self.hessian(z)
        n = self.n
        return np.concatenate([H[..., n:, :], -H[..., :n, :]], axis=-2)


def harmonic_oscillator(n: int = 1) -> FlowSystem:
    """``|z|^2 / 2``; unit-speed rotation, period 2 pi."""
    return FlowSystem((radial_power(1, n, 0.5),), allow_quadratic=True)


def radial_quartic(n: int = 1) -> FlowSystem:
    """``|z|^4``; rotation with angular velocity ``4 |z|^2``."""
    return FlowSystem((radial_power(2, n),))


# -- integration ---------------------------------------------------------------


def _solver_tolerances(tol: float) -> tuple[float, float]:
    rtol = max(1e-2 * tol, 2.5e-14)
    return rtol, 1e-2 * rtol


def _rhs(sys: FlowSystem, shape):
    def f(_t, y):
        return sys.field(y.reshape(shape)).ravel()
    return f


def _guard_event(sys: FlowSystem, shape):
    def ev(_t, y):
        return sys.guard - np.max(np.linalg.norm(y.reshape(shape), axis=-1))
    ev.terminal = True
    ev.direction = -1
    return ev


def integrate_flow(sys: FlowSystem, z0, t: float, tol: float = 1e-10):
    """``Phi_t(z0)`` for one point or a batch of shape (m, 2n).

    Raises DomainError if a trajectory leaves the guard ball and
    ConvergenceError on solver failure or when the energy drift exceeds
    ``tol * (1 + |p(z0)|)``.
    """
    z0 = np.asarray(z0, dtype=float)
    if z0.shape[-1] != 2 * sys.n or z0.ndim > 2:
        raise ArgumentError(f"expected points of length {2 * sys.n}")
    if np.any(np.linalg.norm(z0, axis=-1) >= sys.guard):
        raise DomainError("initial point outside the guard ball")
    if t == 0:
        return z0.copy()
    shape = z0.shape
    rtol, atol = _solver_tolerances(tol)
    sol = solve_ivp(_rhs(sys, shape), (0.0, float(t)), z0.ravel(), method="DOP853",
                    rtol=rtol, atol=atol, events=_guard_event(sys, shape))
    if sol.status == 1:
        raise DomainError(f"trajectory left the guard ball |z| < {sys.guard} at t = {sol.t[-1]:.6g}")
    if sol.status != 0:
        raise ConvergenceError(f"flow integration failed: {sol.message}")
    z1 = sol.y[:, -1].reshape(shape)
    e0, e1 = sys(z0), sys(z1)
    drift = np.abs(e1 - e0)
    if np.any(drift > tol * (1.0 + np.abs(e0))):
        raise ConvergenceError(f"energy drift {np.max(drift):.3g} above tolerance",
                               value=z1, error_estimate=float(np.max(drift)))
    return z1


# -- Taylor structure ------------------------------------------------------------


@dataclass(frozen=True)
class TaylorSample:
    """Degree-``degree`` Taylor term of ``Phi_t`` at 0 evaluated on probe vectors."""

    degree: int
    t: float
    probes: np.ndarray
    values: np.ndarray
    errors: np.ndarray
    eps_ladder: tuple

    @property
    def max_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.values, axis=-1)))


def _default_probes(n: int, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((count, 2 * n))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _fit_coefficients(eps, values, top):
    """Least-squares coefficients of eps^1..eps^top (columns scaled to unit size)."""
    powers = np.arange(1, top + 1)
    scale = np.max(np.abs(eps)) ** powers
    A = (eps[:, None] ** powers[None, :]) / scale
    coef, *_ = np.linalg.lstsq(A, values, rcond=None)
    return coef / scale[:, None]


def flow_taylor_term(sys: FlowSystem, degree: int, t: float, probes=None, n_probes: int = 4,
                     seed: int = 0, eps_ladder: Sequence[float] = EPS_LADDER, tol: float = 1e-12,
                     accuracy: float | None = None) -> TaylorSample:
    """Extract the degree-``degree`` term of ``z -> Phi_t(eps z)`` on probe vectors.

    ``Phi_t(eps z)`` is computed for ``eps`` and ``-eps`` over the ladder, and
    a polynomial in eps is fitted by least squares. The error estimate is the
    change of the coefficient when the fit order is raised by two. With
    ``accuracy`` set, an estimate above it raises ExtrapolationError.
    """
    if not 2 <= degree <= sys.k - 1:
        raise ArgumentError(f"degree must lie in [2, k-1] = [2, {sys.k - 1}]")
    probes = _default_probes(sys.n, n_probes, seed) if probes is None else np.atleast_2d(
        np.asarray(probes, dtype=float))
    ladder = np.asarray(eps_ladder, dtype=float)
    eps = np.concatenate([ladder, -ladder])
    if len(eps) < degree + 4:
        raise ArgumentError("epsilon ladder too short for this degree")
    pts = eps[:, None, None] * probes[None, :, :]
    img = integrate_flow(sys, pts.reshape(-1, 2 * sys.n), t, tol).reshape(pts.shape)
    vals = img.reshape(len(eps), -1)
    top = min(len(eps) - 3, degree + 8)
    lo = _fit_coefficients(eps, vals, top)[degree - 1]
    hi = _fit_coefficients(eps, vals, top + 2)[degree - 1]
    values = hi.reshape(probes.shape)
    errs = np.abs(hi - lo).reshape(probes.shape)
    # floor from the integration tolerance propagated through the fit
    floor = tol * np.max(np.abs(pts)) / np.min(ladder) ** degree * 1e-2
    errs = np.maximum(errs, floor)
    if accuracy is not None and np.max(errs) > accuracy:
        raise ExtrapolationError(
            f"Taylor-term noise floor {np.max(errs):.3g} exceeds requested accuracy {accuracy:.3g}")
    return TaylorSample(degree, float(t), probes, values, errs, tuple(ladder))


def field_taylor_term(sys: FlowSystem, degree: int, probes) -> np.ndarray:
    """Degree-``degree`` homogeneous part of the field ``J grad p`` at probes.

    It is ``J grad`` of the degree-``degree+1`` part of p, zero if absent.
    """
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    n = sys.n
    out = np.zeros_like(probes)
    for p in sys.parts:
        if p.k == degree + 1:
            g = p.gradient(probes)
            out += np.concatenate([g[..., n:], -g[..., :n]], axis=-1)
    return out


# -- periods -----------------------------------------------------------------------


@dataclass(frozen=True)
class PeriodReport:
    """Yorke bound against the shortest return time found.

    ``sup_norm`` comes from sampling plus local maximisation, so it is a lower
    bound on the true supremum and ``yorke_bound`` may overstate the certified
    bound slightly.
    """

    yorke_bound: float
    observed_min_period: float | None
    sup_norm: float
    sup_point: np.ndarray
    radius: float
    trajectories: int
    note: str = "sup |d(J grad p)| sampled then locally maximised: a lower bound on the true sup"


def _sample_ball(dim: int, radius: float, count: int, rng) -> np.ndarray:
    v = rng.standard_normal((count, dim))
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    r = radius * rng.random(count) ** (1.0 / dim)
    return v * r[:, None]


def _sup_field_norm(sys: FlowSystem, radius: float, samples: int, rng):
    dim = 2 * sys.n
    pts = np.concatenate([_sample_ball(dim, radius, samples, rng),
                          radius * _default_probes(sys.n, samples, int(rng.integers(2**31)))])
    norms = np.linalg.norm(sys.field_jacobian(pts), ord=2, axis=(-2, -1))
    best = int(np.argmax(norms))

    def to_ball(u):
        r = np.linalg.norm(u)
        return u if r <= radius else u * (radius / r)

    def neg(u):
        return -float(np.linalg.norm(sys.field_jacobian(to_ball(u)), ord=2))

    res = optimize.minimize(neg, pts[best], method="Nelder-Mead",
                            options={"xatol": 1e-10 * radius, "fatol": 1e-14, "maxiter": 4000})
    cand = to_ball(res.x)
    val = -neg(cand)
    if val < norms[best]:
        return float(norms[best]), pts[best]
    return val, cand


def _return_times(sys: FlowSystem, starts, horizon: float, tol: float, close: float):
    """First return time of each start to the section through it, or None.

    All trajectories are integrated as one system with dense output. Section
    crossings (hyperplane through z0 normal to the field there, crossed in
    the field direction) are bracketed on the step grid and localised with
    brentq on the interpolant.
    """
    m, d = starts.shape
    v0 = sys.field(starts)
    rtol, atol = _solver_tolerances(tol)
    sol = solve_ivp(_rhs(sys, starts.shape), (0.0, horizon), starts.ravel(), method="DOP853",
                    rtol=rtol, atol=atol, dense_output=True)
    if sol.status < 0:
        return [None] * m
    Y = sol.y.reshape(m, d, -1)
    g = np.einsum("mdt,md->mt", Y - starts[:, :, None], v0)
    skip = 1e-6 * horizon
    out = []
    for i in range(m):
        if not np.any(v0[i]):
            out.append(None)
            continue
        found = None
        gi = g[i]
        for j in np.nonzero((gi[:-1] < 0) & (gi[1:] >= 0))[0]:
            if sol.t[j + 1] <= skip:
                continue

            def sect(t, i=i):
                return float(np.dot(sol.sol(t).reshape(m, d)[i] - starts[i], v0[i]))

            te = optimize.brentq(sect, sol.t[j], sol.t[j + 1], xtol=1e-15, rtol=1e-15)
            ze = sol.sol(te).reshape(m, d)[i]
            if np.linalg.norm(ze - starts[i]) <= close * np.linalg.norm(starts[i]):
                found = float(te)
                break
        out.append(found)
    return out


def min_period(sys: FlowSystem, radius: float, samples: int = 256, seed: int = 0,
               trajectories: int = 16, tol: float = 1e-12, close: float = 1e-6) -> PeriodReport:
    """Yorke bound ``2 pi / sup_{|z| <= radius} |J Hess p(z)|`` and observed periods.

    Trajectories start on the sphere ``|z| = radius`` and at random points of
    the ball (seeded). A return is a crossing of the hyperplane through the
    start, normal to the field there, within ``close * |z0|`` of the start.
    Orbits not closing within ``10 * yorke_bound`` are ignored.
    """
    if not 0 < radius <= sys.guard:
        raise ArgumentError("radius must lie in (0, guard]")
    rng = np.random.default_rng(seed)
    sup, at = _sup_field_norm(sys, radius, samples, rng)
    bound = 2 * math.pi / sup if sup > 0 else math.inf
    horizon = 10.0 * bound
    half = max(1, trajectories // 2)
    starts = np.concatenate([
        radius * (1 - 1e-12) * _default_probes(sys.n, half, int(rng.integers(2**31))),
        _sample_ball(2 * sys.n, radius, trajectories - half, rng),
    ])
    periods = [T for T in _return_times(sys, starts, horizon, tol, close) if T is not None]
    observed = min(periods) if periods else None
    return PeriodReport(bound, observed, sup, np.asarray(at), float(radius), len(starts))


# -- generating function (n = 1) ---------------------------------------------------


def _augmented_rhs(sys: FlowSystem):
    """State (x, xi, dx/dy, dxi/dy, action)."""

    def f(_t, y):
        z = y[:2]
        g = sys.gradient(z)
        H = sys.hessian(z)
        dz = np.array([g[1], -g[0]])
        w = y[2:4]
        dw = np.array([H[1] @ w, -(H[0] @ w)])
        # xi * dx/ds - p
        da = z[1] * g[1] - sys(z)
        return np.concatenate([dz, dw, [da]])

    return f


def _shoot(sys: FlowSystem, t: float, x: float, eta: float, tol: float, max_iter: int = 60):
    """Solve ``X(Phi_t(y, eta)) = x`` for y; returns (y, xi_end, action)."""
    if t == 0:
        return x, eta, 0.0
    rtol, atol = 2.5e-14, 1e-18
    y = x
    f = _augmented_rhs(sys)
    last = math.inf
    for _ in range(max_iter):
        if abs(y) >= sys.guard or math.hypot(y, eta) >= sys.guard:
            raise ChartError(f"shooting left the guard ball: t={t}, x={x}, eta={eta}, y={y}")
        sol = solve_ivp(f, (0.0, t), np.array([y, eta, 1.0, 0.0, 0.0]), method="DOP853",
                        rtol=rtol, atol=atol)
        if sol.status != 0:
            raise ChartError(f"shooting integration failed at t={t}, x={x}, eta={eta}: {sol.message}")
        X, Xi, dX, _dXi, A = sol.y[:, -1]
        res = X - x
        if abs(dX) < 1e-8:
            raise ChartError(f"caustic: dX/dy = {dX:.3g} at t={t}, x={x}, eta={eta}")
        step = res / dX
        y -= step
        if abs(step) <= tol * (1 + abs(y)):
            if step != 0:
                sol = solve_ivp(f, (0.0, t), np.array([y, eta, 1.0, 0.0, 0.0]), method="DOP853",
                                rtol=rtol, atol=atol)
                X, Xi, dX, _dXi, A = sol.y[:, -1]
            return y, Xi, A
        if abs(res) > 10 * last and abs(res) > 1e-12:
            raise ChartError(f"shooting diverges at t={t}, x={x}, eta={eta}: residual {res:.3g}")
        last = abs(res)
    raise ChartError(f"shooting did not converge at t={t}, x={x}, eta={eta}: residual {last:.3g}")


def generating_function(sys: FlowSystem, t: float, x: float, eta: float, tol: float = 1e-15):
    """``S(t, x, eta)`` with ``Phi_t(d_eta S, eta) = (x, d_x S)`` and ``S(0) = x eta``.

    Returns ``(S, xi)`` where ``xi = d_x S`` is the final momentum of the
    shooting trajectory. ``S = y eta + int_0^t (xi dx/ds - p) ds``.
    """
    if sys.n != 1:
        raise ArgumentError("generating functions are implemented for n = 1 only")
    y, xi, action = _shoot(sys, float(t), float(x), float(eta), tol)
    return y * eta + action, xi


@dataclass(frozen=True)
class PhaseCheck:
    """Scaling of ``R(t, z) = S - x eta + t p_k`` and generating-function residuals.

    ``z_exponent`` is the slope of log|R| against log|z| at fixed ``z_time``;
    ``t_exponent`` the slope of log|S - x eta + t p0(z)| against log t at
    fixed ``t_point``. Both regressions carry x and x^2 correction columns.
    Intervals are 95% regression confidence intervals; they do not cover the
    bias of truncating the corrections.
    """

    k: int
    z_exponent: float
    z_exponent_ci: tuple
    t_exponent: float
    t_exponent_ci: tuple
    hj_residual: float
    boundary_residual: float
    z_samples: tuple
    t_samples: tuple
    z_time: float
    t_point: tuple

    @property
    def z_exponent_ok(self) -> bool:
        return self.k + 0.7 <= self.z_exponent <= self.k + 1.3

    @property
    def t_exponent_ok(self) -> bool:
        # same 0.3 allowance as the |z| window
        return self.t_exponent >= 1.7

    def passed(self, hj_tol: float = 1e-7, boundary_tol: float = 1e-10) -> bool:
        return (self.z_exponent_ok and self.t_exponent_ok
                and self.hj_residual < hj_tol and self.boundary_residual < boundary_tol)


def _slope(xs, ys, level=0.95, corrections=2):
    """Slope of log y against log x, with columns x, x^2, ... as corrections.

    The corrections absorb the next Taylor orders (relative size ~ x), which
    otherwise bias the slope on any finite grid.
    """
    xs = np.asarray(xs, dtype=float)
    A = np.column_stack([np.log(xs), np.ones_like(xs)] + [xs**j for j in range(1, corrections + 1)])
    b = np.log(np.asarray(ys, dtype=float))
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    dof = len(xs) - A.shape[1]
    if dof < 1:
        raise ArgumentError(f"need at least {A.shape[1] + 1} grid points for the regression")
    resid = b - A @ coef
    cov = (resid @ resid / dof) * np.linalg.inv(A.T @ A)
    half = stats.t.ppf(0.5 + level / 2, dof) * math.sqrt(cov[0, 0])
    return float(coef[0]), (float(coef[0] - half), float(coef[0] + half))


def _hj_residual(sys, t, x, eta, h):
    S = [generating_function(sys, t + j * h, x, eta)[0] for j in (-2, -1, 1, 2)]
    dSdt = (S[0] - 8 * S[1] + 8 * S[2] - S[3]) / (12 * h)
    _, xi = generating_function(sys, t, x, eta)
    return abs(dSdt + float(sys(np.array([x, xi]))))


def phase_structure_check(sys: FlowSystem, t_grid: Sequence[float] | None = None,
                          z_grid: Sequence[float] | None = None, direction=(1.0, 0.0),
                          z_time: float = 0.1, t_point=(0.2, 0.15), hj_step: float = 1e-2) -> PhaseCheck:
    """Measure how ``S(t, x, eta) - x eta`` departs from ``-t p_k(x, eta)``.

    ``z_grid`` holds radii along ``direction`` (evaluated at t = ``z_time``)
    and ``t_grid`` times at the fixed point ``t_point``. The Hamilton-Jacobi
    residual ``|d_t S + p(x, d_x S)|`` (fourth-order differences in t) and
    ``|S(0) - x eta|`` are maximised over all sampled points. The default
    direction is the x axis, where the t^2 term of the remainder vanishes
    for symbols even in xi.
    """
    if sys.n != 1:
        raise ArgumentError("phase_structure_check is implemented for n = 1 only")
    t_grid = np.geomspace(0.01, 0.32, 8) if t_grid is None else np.asarray(t_grid, dtype=float)
    z_grid = np.geomspace(0.02, 0.16, 8) if z_grid is None else np.asarray(z_grid, dtype=float)
    if np.any(np.abs(t_grid) > 2) or abs(z_time) > 2:
        raise ArgumentError("times must satisfy |t| <= 2")
    if np.any(t_grid <= 0) or np.any(z_grid <= 0):
        raise ArgumentError("grids must be positive for the log-log regressions")
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    pk = sys.principal

    z_pts = z_grid[:, None] * d[None, :]
    z_vals = []
    for x, eta in z_pts:
        S, _ = generating_function(sys, z_time, x, eta)
        z_vals.append(abs(S - x * eta + z_time * float(pk(np.array([x, eta])))))
    z_vals = np.array(z_vals)

    xp, ep = map(float, t_point)
    p0 = float(sys(np.array([xp, ep])))
    t_vals = []
    for t in t_grid:
        S, _ = generating_function(sys, t, xp, ep)
        t_vals.append(abs(S - xp * ep + t * p0))
    t_vals = np.array(t_vals)
    if np.any(z_vals == 0) or np.any(t_vals == 0):
        raise ChartError("remainder vanished identically on the grid; regression undefined")

    hj = max([_hj_residual(sys, z_time, x, eta, hj_step) for x, eta in z_pts]
             + [_hj_residual(sys, t, xp, ep, hj_step) for t in t_grid])
    bnd = max(abs(generating_function(sys, 0.0, x, eta)[0] - x * eta)
              for x, eta in list(z_pts) + [(xp, ep)])

    ze, zci = _slope(z_grid, z_vals)
    te, tci = _slope(t_grid, t_vals)
    return PhaseCheck(sys.k, ze, zci, te, tci, float(hj), float(bnd),
                      tuple(zip(z_grid.tolist(), z_vals.tolist())),
                      tuple(zip(t_grid.tolist(), t_vals.tolist())), float(z_time), (xp, ep))


# -- combined suite ----------------------------------------------------------------


@dataclass(frozen=True)
class FlowCheck:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""


def _symplectic_defect(sys: FlowSystem, z0, t: float, h: float = 1e-5) -> float:
    d = 2 * sys.n
    pts = np.concatenate([z0 + h * np.eye(d), z0 - h * np.eye(d)])
    img = integrate_flow(sys, pts, t, tol=1e-12)
    jac = ((img[:d] - img[d:]) / (2 * h)).T
    return abs(float(np.linalg.det(jac)) - 1.0)


def _is_radial_quartic(sys: FlowSystem) -> bool:
    if len(sys.parts) != 1:
        return False
    ref = radial_power(2, sys.n)
    return sorted(sys.principal.to_records(), key=str) == sorted(ref.to_records(), key=str)


def run_flow_suite(sys: FlowSystem, seed: int = 0, radius: float = 0.3, t: float = 1.0,
                   period_radius: float = 0.5, phase: bool = True) -> list[FlowCheck]:
    """Every flow check that applies to ``sys``; thresholds are fixed."""
    rng = np.random.default_rng(seed)
    z = radius * _default_probes(sys.n, 4, int(rng.integers(2**31)))
    out: list[FlowCheck] = []

    zt = integrate_flow(sys, z, t, tol=1e-12)
    drift = float(np.max(np.abs(sys(zt) - sys(z))))
    out.append(FlowCheck("energy conservation", drift < 1e-10, drift, 1e-10))
    ident = float(np.max(np.abs(integrate_flow(sys, z, 0.0) - z)))
    out.append(FlowCheck("Phi_0 = identity", ident == 0.0, ident, 0.0))
    twice = integrate_flow(sys, integrate_flow(sys, z, 0.4 * t, tol=1e-12), 0.6 * t, tol=1e-12)
    group = float(np.max(np.abs(twice - zt)))
    out.append(FlowCheck("group law", group < 1e-8, group, 1e-8))
    det = max(_symplectic_defect(sys, zi, t) for zi in z)
    out.append(FlowCheck("symplectic volume", det < 1e-6, det, 1e-6))

    if _is_radial_quartic(sys) and sys.n == 1:
        T = 5.0
        zr = np.array([0.3 * math.cos(0.7), 0.3 * math.sin(0.7)])
        a = -4.0 * float(zr @ zr) * T
        rot = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
        err = float(np.max(np.abs(integrate_flow(sys, zr, T, tol=1e-12) - rot @ zr)))
        out.append(FlowCheck("closed-form rotation", err < 1e-8, err, 1e-8, "|z| = 0.3, t = 5"))

    if sys.k >= 3:
        top = flow_taylor_term(sys, sys.k - 1, t, seed=seed)
        ref = t * field_taylor_term(sys, sys.k - 1, top.probes)
        scale = float(np.max(np.abs(ref)))
        match = float(np.max(np.abs(top.values - ref))) / scale
        out.append(FlowCheck(f"degree {sys.k - 1} term = t * field term", match < 1e-4, match, 1e-4))
        for m in range(2, sys.k - 1):
            low = flow_taylor_term(sys, m, t, probes=top.probes)
            rel = low.max_norm / top.max_norm
            out.append(FlowCheck(f"degree {m} term vanishes", rel <= 1e-6, rel, 1e-6))
        dbl = flow_taylor_term(sys, sys.k - 1, 2 * t, probes=top.probes)
        lin = float(np.max(np.abs(dbl.values - 2 * top.values))) / (2 * scale)
        out.append(FlowCheck("top term linear in t", lin < 1e-6, lin, 1e-6))

    rep = min_period(sys, period_radius, seed=seed)
    if rep.observed_min_period is None:
        out.append(FlowCheck("Yorke bound <= observed period", True, rep.yorke_bound, math.nan,
                             "no closed orbit detected within 10x the bound"))
    else:
        ok = rep.yorke_bound <= rep.observed_min_period * (1 + 1e-9)
        out.append(FlowCheck("Yorke bound <= observed period", ok, rep.yorke_bound,
                             rep.observed_min_period))

    if phase and sys.n == 1 and sys.k >= 3:
        pc = phase_structure_check(sys)
        out.append(FlowCheck("S(0) = x eta", pc.boundary_residual < 1e-10, pc.boundary_residual, 1e-10))
        out.append(FlowCheck("Hamilton-Jacobi residual", pc.hj_residual < 1e-7, pc.hj_residual, 1e-7))
        has_next = any(p.k == sys.k + 1 for p in sys.parts)
        if has_next:
            ok = pc.z_exponent_ok
            detail = f"window [{sys.k + 0.7}, {sys.k + 1.3}]"
        else:
            ok = pc.z_exponent >= sys.k + 0.7
            detail = "no degree k+1 part: only a lower bound applies"
        out.append(FlowCheck("|z| exponent of S - x eta + t p_k", ok, pc.z_exponent, sys.k + 1, detail))
        out.append(FlowCheck("t exponent of the t-dependent remainder", pc.t_exponent_ok, pc.t_exponent, 2.0))
    return out
