"""Asymptotic approximation of a viscous vortex in an external flow.

In the self-similar variable ``xi = (x - z(t)) / sqrt(nu t)`` the vorticity is
``omega = (Gamma / (nu t)) Omega(xi, t)`` and the approximation reads

    Omega_app = Omega0 + eps^2 (Omega2bar + delta Omega2til)
                       + eps^3 (Omega3bar + delta Omega3til) + eps^4 Omega4,

with ``eps = sqrt(nu t) / d``, ``d = sqrt(Gamma T0)`` and ``delta = nu / Gamma``.
Each correction solves ``Lambda W = -F`` for an explicit forcing F, where
Lambda is the advection operator linearized at the Gaussian vortex.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicHermiteSpline
from scipy.linalg import lu_factor, lu_solve

from .errors import ConvergenceFailure, StepSizeUnderflow
from .flows import ExternalFlow, expansion_term, full_expansion, strain_rates
from .linear_dynamics import assemble_operators, linear_grid
from .polar import ModeSum, angles, project
from .radial_profiles import (
    DEFAULT_DR, DEFAULT_R_MAX, ModeFunction, RadialGrid, gaussian_vortex,
    interpolate_profile, kernel_functions, lambda_inverse, w2_profile,
)

N_THETA_BUILD = 32
PIECES = ("Omega2bar", "Omega2til", "Omega3bar", "Omega3til", "Omega4")


@lru_cache(maxsize=4)
def _grid_and_w2(r_max: float = DEFAULT_R_MAX, dr: float = DEFAULT_DR):
    grid = RadialGrid.uniform(r_max, dr)
    return grid, w2_profile(grid)


def default_grid() -> RadialGrid:
    return _grid_and_w2()[0]


def quadrupole_profile(grid: RadialGrid | None = None):
    """Cached w2 profile on ``grid`` (default grid when omitted)."""
    if grid is None:
        return _grid_and_w2()[1]
    return _grid_and_w2(grid.r_max, grid.dr)[1]


# ---------------------------------------------------------------------------
# scenario and center trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VortexScenario:
    """Physical setup: circulation, viscosity, initial center and flow.

    The center satisfies ``z(t_anchor) = z0``; ``t_anchor`` defaults to ``t0``.
    """

    Gamma: float
    nu: float
    z0: tuple
    t0: float
    T: float
    flow: ExternalFlow
    t_anchor: float | None = None
    delta: float = field(init=False)
    T0: float = field(init=False)
    d: float = field(init=False)

    def __post_init__(self):
        if not self.Gamma > 0 or not self.nu > 0:
            raise ValueError("circulation and viscosity must be positive")
        delta = self.nu / self.Gamma
        if not 0 < delta < 1:
            raise ValueError("delta = nu / Gamma must lie in (0, 1)")
        if self.t0 < 0 or self.T < self.t0:
            raise ValueError("need 0 <= t0 <= T")
        T0 = self.flow.T0
        object.__setattr__(self, "z0", tuple(float(v) for v in self.z0))
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "T0", T0)
        object.__setattr__(self, "d", float(np.sqrt(self.Gamma * T0)) if np.isfinite(T0) else np.inf)
        if self.t_anchor is None:
            object.__setattr__(self, "t_anchor", float(self.t0))

    def eps(self, t):
        """``sqrt(nu t) / d`` (zero for a flow without strain)."""
        if not np.isfinite(self.d):
            return np.zeros_like(np.asarray(t, dtype=float)) + 0.0
        return np.sqrt(self.nu * np.asarray(t, dtype=float)) / self.d

    def core(self, t):
        return np.sqrt(self.nu * np.asarray(t, dtype=float))


@dataclass(frozen=True, eq=False)
class CenterTrajectory:
    """Piecewise cubic Hermite trajectory through accepted RK4 steps."""

    times: np.ndarray
    points: np.ndarray
    rhs: Callable
    variant: str

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.times.size == 1:
            return np.broadcast_to(self.points[0], t.shape + (2,)).copy()
        lo, hi = self.times[0], self.times[-1]
        if np.any(t < lo - 1e-12 * max(1.0, abs(lo))) or np.any(t > hi + 1e-12 * max(1.0, abs(hi))):
            raise ValueError("time outside the integrated range")
        return self._spline(np.clip(t, lo, hi))

    @property
    def _spline(self):
        cached = self.__dict__.get("_spl")
        if cached is None:
            slopes = np.array([self.rhs(t, z) for t, z in zip(self.times, self.points)])
            cached = CubicHermiteSpline(self.times, self.points, slopes, axis=0)
            self.__dict__["_spl"] = cached
        return cached

    def velocity(self, t):
        """``z'(t)`` from the right-hand side at the interpolated center."""
        return self.rhs(float(t), self(float(t)))


def center_rhs(scenario: VortexScenario, variant: str) -> Callable:
    flow, nu = scenario.flow, scenario.nu
    if variant == "naive":
        return lambda t, z: flow.velocity(z, t)
    if variant == "modified":
        return lambda t, z: flow.velocity(z, t) + nu * t * flow.laplacian(z, t)
    raise ValueError("variant must be 'naive' or 'modified'")


def _rk4(rhs, t, z, h):
    k1 = rhs(t, z)
    k2 = rhs(t + h / 2, z + h / 2 * k1)
    k3 = rhs(t + h / 2, z + h / 2 * k2)
    k4 = rhs(t + h, z + h * k3)
    return z + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _integrate_leg(rhs, t_start, z_start, stops, tol, h0, h_min):
    """Adaptive RK4 (step doubling) from t_start through the sorted ``stops``."""
    ts, zs = [t_start], [z_start]
    t, z, h = t_start, np.asarray(z_start, dtype=float), h0
    direction = np.sign(stops[-1] - t_start) if len(stops) else 1.0
    for stop in stops:
        while direction * (stop - t) > 1e-15 * max(1.0, abs(stop)):
            step = direction * min(abs(h), abs(stop - t))
            full = _rk4(rhs, t, z, step)
            half = _rk4(rhs, t, z, step / 2)
            two = _rk4(rhs, t + step / 2, half, step / 2)
            err = np.max(np.abs(two - full)) / 15.0
            scale = tol * (1.0 + np.max(np.abs(z)))
            if err <= scale:
                t = stop if abs(stop - t - step) <= 1e-15 * max(1.0, abs(stop)) else t + step
                z = two + (two - full) / 15.0
                ts.append(t)
                zs.append(z)
            fac = 2.0 if err == 0 else min(2.0, max(0.2, 0.9 * (scale / err) ** 0.2))
            if err > scale:
                h = abs(step) * fac
            elif abs(step) >= 0.999 * h:
                h = h * fac
            if h < h_min:
                raise StepSizeUnderflow(f"step {h:.2e} fell below {h_min:.2e}")
    return ts, zs


def integrate_center(scenario: VortexScenario, variant: str = "modified", t_end=None,
                     output_times=None, t_start=None, rtol: float = 1e-12) -> CenterTrajectory:
    """Integrate the center ODE ``z' = f(z, t)`` (naive) or with ``+ nu t Laplacian f``.

    The trajectory starts from ``z(t_anchor) = z0`` and covers the range
    spanned by ``t_start`` (default ``t0``), ``t_end`` (default ``T``) and
    ``output_times``; steps land exactly on every output time.
    """
    rhs = center_rhs(scenario, variant)
    t_a = float(scenario.t_anchor)
    z_a = np.asarray(scenario.z0, dtype=float)
    outs = [] if output_times is None else [float(v) for v in np.atleast_1d(output_times)]
    lo = min([t_a, scenario.t0 if t_start is None else float(t_start)] + outs)
    hi = max([t_a, scenario.T if t_end is None else float(t_end)] + outs)
    T0 = scenario.T0
    if not np.isfinite(T0):
        times = np.array(sorted({lo, t_a, hi}))
        return CenterTrajectory(times, np.tile(z_a, (times.size, 1)), rhs, variant)
    h0 = 1e-2 * T0
    h_min = 1e-12 * T0
    fwd = sorted({v for v in outs + [hi] if v > t_a})
    bwd = sorted({v for v in outs + [lo] if v < t_a}, reverse=True)
    tf, zf = _integrate_leg(rhs, t_a, z_a, fwd, rtol, h0, h_min)
    tb, zb = _integrate_leg(rhs, t_a, z_a, bwd, rtol, h0, h_min)
    times = np.array(tb[::-1] + tf[1:])
    points = np.array(zb[::-1] + zf[1:])
    return CenterTrajectory(times, points, rhs, variant)


# ---------------------------------------------------------------------------
# approximate solution
# ---------------------------------------------------------------------------

def apply_diffusion_shift(mode, sigma: float):
    """Return ``(sigma - L) W`` with ``L = Laplacian + (r/2) d_r + 1``.

    Accepts a :class:`ModeFunction` or a :class:`ModeSum`.
    """
    if isinstance(mode, ModeFunction):
        field_ = ModeSum.from_modes(mode.grid, mode)
        out = sigma * field_ - field_.diffusion()
        return out.mode(mode.n)
    return sigma * mode - mode.diffusion()


def _invert(forcing: ModeSum, project_n1: bool = False) -> ModeSum:
    """Solve ``Lambda W = forcing`` mode by mode (n >= 1)."""
    out = {}
    for n, m in forcing.modes.items():
        if n == 0:
            continue
        if not (np.any(m.c) or np.any(m.s)):
            continue
        out[n] = lambda_inverse(n, m, project=project_n1 and n == 1)
    return ModeSum(forcing.grid, out)


def _polar_points(grid: RadialGrid, theta, idx=slice(None)):
    r = grid.r[idx]
    th = np.asarray(theta)[:, None]
    return np.stack([r * np.cos(th), r * np.sin(th)], axis=-1), r


def _polar_components(vec, theta):
    th = np.asarray(theta)[:, None]
    c, s = np.cos(th), np.sin(th)
    return vec[..., 0] * c + vec[..., 1] * s, -vec[..., 0] * s + vec[..., 1] * c


@dataclass(frozen=True, eq=False)
class ApproxSolution:
    """Correction profiles of the approximation at one time."""

    scenario: VortexScenario
    t: float
    eps: float
    z: np.ndarray
    zprime: np.ndarray
    a: float
    b: float
    c: float
    pieces: dict
    grid: RadialGrid

    @property
    def delta(self) -> float:
        return self.scenario.delta

    def correction(self, keep=PIECES) -> ModeSum:
        """``Omega_app - Omega0`` restricted to the pieces named in ``keep``."""
        e, dl = self.eps, self.delta
        weights = {"Omega2bar": e ** 2, "Omega2til": e ** 2 * dl, "Omega3bar": e ** 3,
                   "Omega3til": e ** 3 * dl, "Omega4": e ** 4}
        out = ModeSum(self.grid, {})
        for name in keep:
            out = out + weights[name] * self.pieces[name]
        return out

    def full(self, keep=PIECES) -> ModeSum:
        return ModeSum.radial(self.grid, gaussian_vortex(self.grid.r)) + self.correction(keep)

    def evaluate(self, xi, keep=PIECES) -> np.ndarray:
        """``Omega_app`` at Cartesian points ``xi[..., 2]``."""
        xi = np.asarray(xi, dtype=float)
        base = gaussian_vortex(np.hypot(xi[..., 0], xi[..., 1]))
        return base + self.correction(keep).at_points(xi)


def _strain_ab(flow, traj, t):
    sr = strain_rates(flow, traj(t), t)
    return sr.a, sr.b


def build_correction_profiles(scenario: VortexScenario, t: float, trajectory: CenterTrajectory,
                              grid: RadialGrid | None = None,
                              n_theta: int = N_THETA_BUILD) -> ApproxSolution:
    """Construct all correction profiles at time ``t`` along ``trajectory``."""
    grid = grid or default_grid()
    w2 = quadrupole_profile(grid).values
    flow = scenario.flow
    z = np.asarray(trajectory(t), dtype=float)
    zp = np.asarray(trajectory.velocity(t), dtype=float)
    empty = ModeSum(grid, {})
    eps = float(scenario.eps(t))
    if not np.isfinite(scenario.T0):
        return ApproxSolution(scenario, t, 0.0, z, zp, 0.0, 0.0, 0.0,
                              {k: empty for k in PIECES}, grid)
    T0, d = scenario.T0, scenario.d
    sr = strain_rates(flow, z, t)
    a, b = sr.a, sr.b
    r = grid.r
    th = angles(n_theta)
    xi, _ = _polar_points(grid, th)
    omega0 = gaussian_vortex(r)

    # second order: Lambda Omega2bar = -E2.grad Omega0
    o2bar = ModeSum.from_modes(grid, ModeFunction.from_arrays(2, grid, -T0 * b * w2, T0 * a * w2))
    o2til = _invert(-1.0 * apply_diffusion_shift(o2bar, 1.0))

    # third order: hatted E3 drives modes 1 and 3
    e3 = expansion_term(flow, z, t, 3, xi, T0, d, hatted=True)
    f3 = -0.5 * omega0 * np.sum(xi * e3, axis=-1)
    f3_modes = project(grid, f3, 3, keep=(1, 3))
    o3bar = _invert(-1.0 * f3_modes)
    o3til = _invert(-1.0 * apply_diffusion_shift(o3bar, 1.5), project_n1=True)

    # fourth order: E4.grad Omega0 + (U2bar + E2).grad Omega2bar + T0 d_t Omega2bar
    e4 = expansion_term(flow, z, t, 4, xi, T0, d)
    e2 = expansion_term(flow, z, t, 2, xi, T0, d)
    e2r, e2t = _polar_components(e2, th)
    ur, ut = o2bar.velocity(th)
    gr, gt = o2bar.gradient(th)
    f4 = -0.5 * omega0 * np.sum(xi * e4, axis=-1) + (ur + e2r) * gr + (ut + e2t) * gt
    hstep = 1e-3 * T0
    ap, bp = _strain_ab(flow, trajectory, t + hstep)
    am, bm = _strain_ab(flow, trajectory, t - hstep) if t - hstep >= trajectory.times[0] else (a, b)
    span = 2 * hstep if t - hstep >= trajectory.times[0] else hstep
    da, db = (ap - am) / span, (bp - bm) / span
    f4_modes = project(grid, f4, 4, keep=(2, 4))
    f4_modes = f4_modes + ModeSum.from_modes(
        grid, ModeFunction.from_arrays(2, grid, -T0 * T0 * db * w2, T0 * T0 * da * w2))
    o4 = _invert(-1.0 * f4_modes)

    pieces = {"Omega2bar": o2bar, "Omega2til": o2til, "Omega3bar": o3bar,
              "Omega3til": o3til, "Omega4": o4}
    return ApproxSolution(scenario, float(t), eps, z, zp, a, b, sr.c, pieces, grid)


def eval_Omega_app_full(approx: ApproxSolution, xi, t: float | None = None) -> np.ndarray:
    """Value of the full approximation at rescaled points ``xi``."""
    if t is not None and abs(t - approx.t) > 1e-12 * max(1.0, abs(t)):
        raise ValueError("profiles were built for a different time")
    return approx.evaluate(xi)


def eval_omega_app(Gamma: float, ell: float, z, flow: ExternalFlow, t: float, x,
                   grid: RadialGrid | None = None) -> np.ndarray:
    """Physical vorticity ``(Gamma/ell^2) Omega0(xi) + w2(|xi|)(a sin 2theta - b cos 2theta)``.

    ``xi = (x - z)/ell`` and (a, b) are the strain rates of ``flow`` at z.
    """
    if not ell > 0:
        raise ValueError("core size must be positive")
    grid = grid or default_grid()
    x = np.asarray(x, dtype=float)
    xi = (x - np.asarray(z, dtype=float)) / ell
    r2 = xi[..., 0] ** 2 + xi[..., 1] ** 2
    r = np.sqrt(r2)
    base = Gamma / ell ** 2 * gaussian_vortex(r)
    sr = strain_rates(flow, z, t)
    if sr.a == 0.0 and sr.b == 0.0:
        return base
    with np.errstate(invalid="ignore", divide="ignore"):
        sin2 = np.where(r2 > 0, 2 * xi[..., 0] * xi[..., 1] / r2, 0.0)
        cos2 = np.where(r2 > 0, (xi[..., 0] ** 2 - xi[..., 1] ** 2) / r2, 0.0)
    w2 = interpolate_profile(grid, quadrupole_profile(grid).values, r, 1)
    return base + w2 * (sr.a * sin2 - sr.b * cos2)


# ---------------------------------------------------------------------------
# remainder
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResidualNorms:
    sup_weighted: float
    l2_weighted: float
    l2: float


def residual_field(scenario: VortexScenario, t: float, trajectory: CenterTrajectory,
                   grid: RadialGrid | None = None, h: float = 1e-3, r_eval: float = 14.0,
                   n_theta: int = 128, stride: int = 4, keep=PIECES):
    """Remainder ``delta (t d_t - L) Omega_app + (U_app + E) . grad Omega_app`` on a polar grid.

    ``t d_t`` is a centered difference in ``log t`` with step ``h``.  Returns
    ``(theta, r, R)`` with ``R`` of shape ``(n_theta, len(r))``; the origin
    node is excluded.
    """
    grid = grid or default_grid()
    approx = build_correction_profiles(scenario, t, trajectory, grid)
    plus = build_correction_profiles(scenario, t * np.exp(h), trajectory, grid)
    minus = build_correction_profiles(scenario, t * np.exp(-h), trajectory, grid)
    idx = slice(stride, grid.index(r_eval) + 1, stride)
    th = angles(n_theta)
    xi, r = _polar_points(grid, th, idx)
    corr = approx.correction(keep)
    omega0 = gaussian_vortex(r)
    v0 = r * kernel_functions(r).v_star

    dt_corr = (plus.correction(keep).sample(th, idx) - minus.correction(keep).sample(th, idx)) / (2 * h)
    diff_corr = corr.diffusion().sample(th, idx)
    gr, gt = corr.gradient(th, idx)
    ur, ut = corr.velocity(th, idx)
    if np.isfinite(scenario.T0):
        E = full_expansion(scenario.flow, approx.z, approx.zprime, t, approx.eps, xi,
                           scenario.T0, scenario.d)
    else:
        E = np.zeros_like(xi)
    er, et = _polar_components(E, th)
    grad0_r = -0.5 * r * omega0
    res = scenario.delta * (dt_corr - diff_corr)
    res += v0 * gt + ur * grad0_r + ur * gr + ut * gt
    res += er * (grad0_r + gr) + et * gt
    return th, r, res


def residual_norm(scenario: VortexScenario, t: float, trajectory: CenterTrajectory,
                  grid: RadialGrid | None = None, power: int = 12, keep=PIECES,
                  **kwargs) -> ResidualNorms:
    """Weighted sup and L2 norms of the remainder.

    The weight is ``(1 + |xi|)^power exp(-|xi|^2/4)``.
    """
    th, r, res = residual_field(scenario, t, trajectory, grid, keep=keep, **kwargs)
    weight = (1 + r) ** power * np.exp(-r * r / 4)
    scaled = res / weight
    dth = 2 * np.pi / th.size
    dr = r[1] - r[0]
    l2w = np.sqrt(np.sum(scaled ** 2 * r) * dth * dr)
    l2 = np.sqrt(np.sum(res ** 2 * r) * dth * dr)
    return ResidualNorms(float(np.max(np.abs(scaled))), float(l2w), float(l2))


# ---------------------------------------------------------------------------
# strained steady vortex (Burgers)
# ---------------------------------------------------------------------------

def strain_operator(field_: ModeSum, n_theta: int = N_THETA_BUILD, n_max: int = 6) -> ModeSum:
    """``M W = (xi1 d1 - xi2 d2) W / 2 = (cos 2theta r d_r - sin 2theta d_theta) W / 2``."""
    th = angles(n_theta)
    r = field_.grid.r
    gr, gt = field_.gradient(th)
    vals = 0.5 * (np.cos(2 * th)[:, None] * r * gr - np.sin(2 * th)[:, None] * r * gt)
    return project(field_.grid, vals, n_max)


@dataclass(frozen=True, eq=False)
class BurgersSolution:
    field: ModeSum
    iterations: int
    delta: float
    lam: float


def _stretch_matrix(op) -> np.ndarray:
    """Central-difference ``r d_r`` on the unknowns of ``op`` (zero beyond the ends)."""
    r, h = op.radii, op.grid.dr
    size = r.size
    D = np.zeros((size, size))
    i = np.arange(size - 1)
    D[i, i + 1] = r[i] / (2 * h)
    D[i + 1, i] = -r[i + 1] / (2 * h)
    if op.n == 0:
        D[0, :] = 0.0
    return D


def solve_burgers(delta: float, lam: float, grid: RadialGrid | None = None,
                  tol: float = 1e-8, max_iter: int = 200, modes=(2, 4)) -> BurgersSolution:
    """Steady vortex in the strain ``lam M``: ``U.grad Omega = delta (L + lam M) Omega``.

    The radial part is kept at the Gaussian and ``W = Omega - Omega0`` is
    expanded on ``modes``.  Each iterate solves the linear system

        (Lambda - delta L - delta lam M) W = delta lam M Omega0 - P(U_W . grad W)

    in the weighted discretization of :mod:`linear_dynamics`, with the
    quadratic term lagged.  Iteration stops once the relative L2 change drops
    below ``tol``.
    """
    if not 0 < delta <= 0.05:
        raise ValueError("solve_burgers needs 0 < delta <= 0.05")
    if not 0 <= lam < 1:
        raise ValueError("asymmetry parameter must lie in [0, 1)")
    modes = tuple(sorted(modes))
    if any(n < 2 or n % 2 for n in modes):
        raise ValueError("Burgers modes must be even and at least 2")
    grid = grid or linear_grid()
    ops = [assemble_operators(n, grid) for n in modes]
    sizes = [op.radii.size for op in ops]
    offs = np.concatenate([[0], np.cumsum(sizes)])
    total = offs[-1]
    A = np.zeros((total, total), dtype=complex)
    for k, op in enumerate(ops):
        blk = slice(offs[k], offs[k + 1])
        A[blk, blk] = op.Lambda - delta * op.L
        for j, other in enumerate(ops):
            col = slice(offs[j], offs[j + 1])
            # M sends mode m to m + 2 with (r d_r - m)/4 and to m - 2 with (r d_r + m)/4
            if other.n == op.n - 2:
                A[blk, col] -= delta * lam * 0.25 * (_stretch_matrix(other) - other.n * np.eye(sizes[j]))
            elif other.n == op.n + 2:
                A[blk, col] -= delta * lam * 0.25 * (_stretch_matrix(other) + other.n * np.eye(sizes[j]))
    rhs0 = np.zeros(total, dtype=complex)
    if modes[0] == 2:
        r = ops[0].radii
        rhs0[offs[0]:offs[1]] = delta * lam * (-0.25 * r * r * gaussian_vortex(r))
    lu = lu_factor(A)
    base = ModeSum.radial(grid, gaussian_vortex(grid.r))
    x = lu_solve(lu, rhs0)
    pert = _burgers_field(ops, offs, x, grid)
    for it in range(1, max_iter + 1):
        quad = _advect(pert, modes)
        rhs = rhs0.copy()
        for k, op in enumerate(ops):
            m = quad.mode(op.n)
            rhs[offs[k]:offs[k + 1]] -= op.from_profiles(m.c, m.s)
        new = lu_solve(lu, rhs)
        change = np.linalg.norm(new - x)
        x = new
        pert = _burgers_field(ops, offs, x, grid)
        if change <= tol * max(np.linalg.norm(x), 1e-300):
            return BurgersSolution(base + pert, it, delta, lam)
    raise ConvergenceFailure(f"Burgers iteration did not converge in {max_iter} steps")


def _burgers_field(ops, offs, x, grid) -> ModeSum:
    out = []
    for k, op in enumerate(ops):
        c, s = op.to_profiles(x[offs[k]:offs[k + 1]])
        out.append(ModeFunction.from_arrays(op.n, grid, c, s))
    return ModeSum.from_modes(grid, *out)


def _advect(field_: ModeSum, modes, n_theta: int = N_THETA_BUILD) -> ModeSum:
    """``P(U_W . grad W)`` projected on ``modes``."""
    if not field_.modes:
        return ModeSum(field_.grid, {})
    th = angles(n_theta)
    ur, ut = field_.velocity(th)
    gr, gt = field_.gradient(th)
    return project(field_.grid, ur * gr + ut * gt, max(modes), keep=modes)


def _l2(field_: ModeSum) -> float:
    return float(np.sqrt(sum(m.norm() ** 2 for m in field_.modes.values())))


def burgers_first_order(delta: float, lam: float, grid: RadialGrid | None = None) -> ModeSum:
    """``Omega0 - (lam delta / 2) w2 sin 2theta`` sampled on ``grid``."""
    grid = grid or linear_grid()
    w2 = quadrupole_profile()(grid.r)
    return ModeSum.from_modes(grid, ModeFunction.from_arrays(0, grid, gaussian_vortex(grid.r)),
                              ModeFunction.from_arrays(2, grid, None, -0.5 * lam * delta * w2))


def l1_norm(field_: ModeSum, n_theta: int = 64, r_max: float | None = None) -> float:
    """L1 norm over the plane by polar quadrature."""
    grid = field_.grid
    idx = slice(0, grid.size if r_max is None else grid.index(r_max) + 1)
    th = angles(n_theta)
    vals = np.abs(field_.sample(th, idx))
    r = grid.r[idx]
    return float(simpson(vals.mean(axis=0) * r, x=r) * 2 * np.pi)
