"""Error functionals, vortex tracking, quadrupole extraction and rate fits.

All functions are pure: they read snapshots and return numbers.
"""
from __future__ import annotations

import csv
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.integrate import simpson

from .asymptotic import default_grid, eval_omega_app, quadrupole_profile
from .errors import NoDecayDetected, WeightOverflowRisk, ZeroCirculation
from .flows import ExternalFlow
from .polar import ModeSum
from .radial_profiles import gaussian_vortex, interpolate_profile, radial_derivative

MOMENT_FLOOR = 1e-14
DECAY_FLOOR = 1e-8


def _values(snapshot_or_values):
    """Physical values and lab-frame points of a snapshot."""
    return snapshot_or_values.field.physical(), snapshot_or_values.points()


def l1_error(snapshot, reference, Gamma: float) -> float:
    """``(1/Gamma) sum |omega - omega_ref| dx^2`` over the grid.

    ``reference`` is an array on the grid or a callable of lab-frame points.
    """
    values, pts = _values(snapshot)
    ref = reference(pts) if callable(reference) else np.asarray(reference, dtype=float)
    if not np.all(np.isfinite(ref)):
        raise ValueError("reference is not finite on the grid")
    dx = snapshot.grid.dx
    return float(np.sum(np.abs(values - ref)) * dx * dx / Gamma)


def lamb_oseen(Gamma: float, ell: float, center) -> Callable:
    """Evaluator of ``(Gamma/ell^2) Omega0((x - center)/ell)``."""
    z = np.asarray(center, dtype=float)

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        r = np.hypot(x[..., 0] - z[0], x[..., 1] - z[1]) / ell
        return Gamma / ell ** 2 * gaussian_vortex(r)

    return evaluate


def omega_app(Gamma: float, ell: float, center, flow: ExternalFlow, t: float) -> Callable:
    """Evaluator of the leading-order approximation centered at ``center``."""
    grid = default_grid()

    def evaluate(x):
        return eval_omega_app(Gamma, ell, center, flow, t, x, grid)

    return evaluate


@dataclass(frozen=True)
class Moments:
    Gamma: float
    center: np.ndarray
    second: np.ndarray


def vorticity_moments(snapshot) -> Moments:
    """Circulation, center of vorticity and centered second-moment tensor.

    Coordinates are the unwrapped box coordinates around the box center, so
    the vorticity must be concentrated well inside the box.
    """
    values, pts = _values(snapshot)
    dx2 = snapshot.grid.dx ** 2
    gamma = float(np.sum(values) * dx2)
    if abs(gamma) < MOMENT_FLOOR:
        raise ZeroCirculation(f"circulation {gamma:.3e} is below {MOMENT_FLOOR}")
    center = np.einsum("ij,ijk->k", values, pts) * dx2 / gamma
    rel = pts - center
    second = np.einsum("ij,ijk,ijl->kl", values, rel, rel) * dx2
    return Moments(gamma, center, second)


@dataclass(frozen=True)
class QuadrupoleFit:
    a_hat: float
    b_hat: float


def quadrupole_norm(grid=None) -> float:
    """``pi int w2(r)^2 r dr``, the squared norm of ``w2 sin 2 theta``."""
    grid = grid or default_grid()
    w2 = quadrupole_profile(grid).values
    return float(np.pi * simpson(w2 * w2 * grid.r, x=grid.r))


def quadrupole_fit(snapshot, center, ell: float, Gamma: float) -> QuadrupoleFit:
    """Strain rates implied by the quadrupole part of ``omega - Lamb-Oseen``.

    The deviation is projected on ``w2(|xi|) sin 2 theta`` and
    ``w2(|xi|) cos 2 theta`` by Cartesian quadrature (spectrally accurate for
    resolved Gaussian-decaying integrands).  A deviation equal to
    ``w2 (a sin 2 theta - b cos 2 theta)`` returns ``(a, b)``.
    """
    values, pts = _values(snapshot)
    dev = values - lamb_oseen(Gamma, ell, center)(pts)
    return project_quadrupole(dev, pts, snapshot.grid.dx, center, ell)


def project_quadrupole(dev, pts, dx: float, center, ell: float) -> QuadrupoleFit:
    grid = default_grid()
    z = np.asarray(center, dtype=float)
    xi1 = (pts[..., 0] - z[0]) / ell
    xi2 = (pts[..., 1] - z[1]) / ell
    r2 = xi1 * xi1 + xi2 * xi2
    r = np.sqrt(r2)
    w2 = interpolate_profile(grid, quadrupole_profile(grid).values, r, 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        sin2 = np.where(r2 > 0, 2 * xi1 * xi2 / r2, 0.0)
        cos2 = np.where(r2 > 0, (xi1 * xi1 - xi2 * xi2) / r2, 0.0)
    scale = ell * ell * quadrupole_norm(grid)
    ps = np.sum(dev * w2 * sin2) * dx * dx
    pc = np.sum(dev * w2 * cos2) * dx * dx
    return QuadrupoleFit(float(ps / scale), float(-pc / scale))


@dataclass(frozen=True)
class WeightedEnergy:
    E: float
    F: float


def weighted_energy(w: ModeSum, decay_tol: float = DECAY_FLOOR) -> WeightedEnergy:
    """``E = int p w^2`` and ``F = int p (|grad w|^2 + |xi|^2 w^2 + w^2)`` with ``p = exp(|xi|^2/4)``.

    Angular integrals are done mode by mode (exact in theta); radial
    derivatives use the high-order profile stencils.
    """
    grid = w.grid
    r = grid.r
    peak = w.max_abs()
    if peak == 0.0:
        return WeightedEnergy(0.0, 0.0)
    tail = max(max(abs(m.c[-1]), abs(m.s[-1])) for m in w.modes.values())
    if tail > decay_tol * peak:
        raise WeightOverflowRisk(f"field is {tail / peak:.2e} of its peak at R_max = {r[-1]}")
    p = np.exp(r * r / 4)
    sq = np.zeros_like(r)
    grad = np.zeros_like(r)
    for n, m in w.modes.items():
        ang = 2 * np.pi if n == 0 else np.pi
        par = (-1) ** n
        for prof in (m.c, m.s):
            if n == 0 and prof is m.s:
                continue
            d = radial_derivative(prof, grid.dr, par)
            sq += ang * prof * prof
            with np.errstate(invalid="ignore", divide="ignore"):
                tang = np.where(r > 0, n * n * prof * prof / (r * r), 0.0)
            grad += ang * (d * d + tang)
    # Gaussian decay keeps p * w^2 small near R_max; the product stays finite
    E = simpson(p * sq * r, x=r)
    F = simpson(p * (grad + (r * r + 1) * sq) * r, x=r)
    return WeightedEnergy(float(E), float(F))


def relaxation_fit(t, error, t0: float | None = None, plateau: float | None = None,
                   late_fraction: float = 0.1, floor_ratio: float = 0.05) -> float:
    """Exponent ``beta`` of ``error(t) - plateau ~ (t0/t)^beta``.

    The plateau defaults to the mean of the last ``late_fraction`` of the
    samples.  The fit uses samples whose excess over the plateau is above
    ``floor_ratio`` times the initial excess.
    """
    t = np.asarray(t, dtype=float)
    err = np.asarray(error, dtype=float)
    if t.size < 20:
        raise ValueError("relaxation history needs at least 20 samples")
    t0 = float(t[0]) if t0 is None else float(t0)
    if t[-1] / t0 < 3:
        raise ValueError("relaxation history must span t/t0 >= 3")
    if plateau is None:
        tail = max(1, int(np.ceil(late_fraction * t.size)))
        plateau = float(np.mean(err[-tail:]))
    excess = err - plateau
    if not excess[0] > 0:
        raise NoDecayDetected("no excess over the plateau at the first sample")
    keep = np.flatnonzero(excess > floor_ratio * excess[0])
    # contiguous leading run only, so plateau noise is excluded
    stop = keep.size
    gaps = np.flatnonzero(np.diff(keep) != 1)
    if gaps.size:
        stop = gaps[0] + 1
    keep = keep[:stop]
    if keep.size < 3 or excess[keep[-1]] > 0.5 * excess[0]:
        raise NoDecayDetected("excess over the plateau does not decay")
    x = np.log(t0 / t[keep])
    y = np.log(excess[keep])
    slope = np.polyfit(x, y, 1)[0]
    if not slope > 0:
        raise NoDecayDetected("fitted exponent is not positive")
    return float(slope)


@dataclass(frozen=True)
class TrackingRecord:
    t: float
    eps: float
    l1_vs_lambOseen_zhat: float
    l1_vs_lambOseen_z: float
    l1_vs_omega_app: float
    a_hat: float
    b_hat: float
    zbar_x: float
    zbar_y: float
    z_x: float
    z_y: float
    zhat_x: float
    zhat_y: float

    def __post_init__(self):
        if not all(np.isfinite(astuple(self))):
            raise ValueError("tracking record has non-finite entries")


REPORT_COLUMNS = tuple(f.name for f in fields(TrackingRecord))


def track(snapshot, scenario, modified, naive) -> TrackingRecord:
    """Diagnostics of one snapshot against the three approximations."""
    t = snapshot.t
    G = scenario.Gamma
    ell = float(scenario.core(t))
    z = np.asarray(modified(t), dtype=float)
    zh = np.asarray(naive(t), dtype=float)
    mom = vorticity_moments(snapshot)
    fit = quadrupole_fit(snapshot, z, ell, G)
    return TrackingRecord(
        t=float(t), eps=float(scenario.eps(t)),
        l1_vs_lambOseen_zhat=l1_error(snapshot, lamb_oseen(G, ell, zh), G),
        l1_vs_lambOseen_z=l1_error(snapshot, lamb_oseen(G, ell, z), G),
        l1_vs_omega_app=l1_error(snapshot, omega_app(G, ell, z, scenario.flow, t), G),
        a_hat=fit.a_hat, b_hat=fit.b_hat,
        zbar_x=float(mom.center[0]), zbar_y=float(mom.center[1]),
        z_x=float(z[0]), z_y=float(z[1]), zhat_x=float(zh[0]), zhat_y=float(zh[1]))


def write_report(path, records) -> Path:
    """Per-run tracking CSV with the fixed column order."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(REPORT_COLUMNS)
        for rec in records:
            out.writerow([repr(float(v)) for v in astuple(rec)])
    return path


def read_report(path) -> list[TrackingRecord]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [TrackingRecord(**{k: float(row[k]) for k in REPORT_COLUMNS}) for row in rows]
