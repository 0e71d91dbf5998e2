"""Direct simulations of the tracking and relaxation scenarios.

``tracking_run`` starts the solver from the full approximation (or a
Gaussian) at a time where the core is resolved and follows the modified
center with the box.  ``relaxation_run`` starts from a symmetric Gaussian in a steady flow
and records how the deviation from the approximation decays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .asymptotic import VortexScenario, build_correction_profiles, integrate_center
from .errors import UnderResolved
from .diagnostics import TrackingRecord, l1_error, lamb_oseen, omega_app, quadrupole_fit, track
from .spectral_solver import (
    Frame, PeriodicGrid, Snapshot, SolverConfig, SolverState, SpectralField, init_gaussian,
    run_simulation,
)

MIN_CORE_CELLS = 3.0


def box_side(scenario: VortexScenario, N: int, t_start: float, t_end: float,
             d_factor: float = 8.0, core_factor: float = 40.0, cells: float = 3.2) -> float:
    """Box side ``min(d_factor d, N ell(t_start) / cells)``.

    The second bound keeps ``cells`` grid spacings per core radius at the
    start.  Raises :class:`UnderResolved` when that box is smaller than
    ``core_factor sqrt(nu t_end)``.
    """
    ell = float(scenario.core(t_start))
    L = min(d_factor * scenario.d, N * ell / cells)
    need = core_factor * float(scenario.core(t_end))
    if L < need:
        raise UnderResolved(f"a box of {need:.3e} cannot resolve core {ell:.3e} with N = {N}")
    return L


def approx_field(grid: PeriodicGrid, scenario: VortexScenario, t: float, modified) -> SpectralField:
    """Full approximation ``(Gamma/ell^2) Omega_app((x - z)/ell)`` sampled on the grid."""
    ell = float(scenario.core(t))
    if ell < MIN_CORE_CELLS * grid.dx:
        raise UnderResolved(f"core size {ell:.3e} is below 3 grid spacings ({3 * grid.dx:.3e})")
    approx = build_correction_profiles(scenario, t, modified)
    xi = (grid.points() - approx.z) / ell
    values = scenario.Gamma / ell ** 2 * approx.evaluate(xi)
    return SpectralField.from_physical(grid, values)


@dataclass
class RunResult:
    records: list
    snapshots: list
    steps: int
    grid: PeriodicGrid


def tracking_run(scenario: VortexScenario, N: int, t_start: float, output_times,
                 L: float | None = None, config: SolverConfig | None = None,
                 keep_snapshots: bool = False, init: str = "approx") -> RunResult:
    """Solver run with the box following the modified center.

    ``init = "approx"`` starts from the full approximation (well-prepared
    data); ``init = "gaussian"`` starts from the symmetric Gaussian.
    """
    if init not in ("approx", "gaussian"):
        raise ValueError("init must be 'approx' or 'gaussian'")
    outs = sorted(float(t) for t in output_times)
    t_end = outs[-1]
    modified = integrate_center(scenario, "modified", t_end=t_end, t_start=t_start, output_times=outs)
    naive = integrate_center(scenario, "naive", t_end=t_end, t_start=t_start, output_times=outs)
    L = box_side(scenario, N, t_start, t_end) if L is None else L
    grid = PeriodicGrid(L, N)
    frame = Frame(modified, modified.velocity)
    # box coordinates: the approximation is centered at the box origin
    lab = PeriodicGrid(L, N, tuple(modified(t_start)))
    if init == "approx":
        start = approx_field(lab, scenario, t_start, modified)
    else:
        start = init_gaussian(lab, scenario.Gamma, float(scenario.core(t_start)), lab.center)
    field0 = SpectralField(grid, start.coeffs)
    state = SolverState(t_start, field0, scenario.flow, scenario.nu, config or SolverConfig(), frame)
    records, snaps = [], []

    def collect(snap):
        records.append(track(snap, scenario, modified, naive))
        if keep_snapshots:
            snaps.append(snap)

    run_simulation(state, outs, collect)
    return RunResult(records, snaps, state.steps, grid)


@dataclass(frozen=True)
class RelaxationSample:
    t: float
    l1_vs_omega_app: float
    l1_vs_lambOseen: float
    a_hat: float
    b_hat: float


def relaxation_run(scenario: VortexScenario, N: int, L: float, output_times,
                   config: SolverConfig | None = None) -> list[RelaxationSample]:
    """Symmetric Gaussian at ``scenario.t0`` and center ``z0`` (a stagnation point)."""
    outs = sorted(float(t) for t in output_times)
    t0 = scenario.t0
    z0 = np.asarray(scenario.z0, dtype=float)
    grid = PeriodicGrid(L, N, tuple(z0))
    G = scenario.Gamma
    field0 = init_gaussian(grid, G, float(scenario.core(t0)), z0)
    state = SolverState(t0, field0, scenario.flow, scenario.nu, config or SolverConfig())
    samples = []

    def collect(snap):
        ell = float(scenario.core(snap.t))
        fit = quadrupole_fit(snap, z0, ell, G)
        samples.append(RelaxationSample(
            snap.t, l1_error(snap, omega_app(G, ell, z0, scenario.flow, snap.t), G),
            l1_error(snap, lamb_oseen(G, ell, z0), G), fit.a_hat, fit.b_hat))

    run_simulation(state, outs, collect)
    return samples


def initial_gap(scenario: VortexScenario, N: int, L: float) -> float:
    """L1 distance at ``t0`` between the Gaussian and the approximation."""
    z0 = np.asarray(scenario.z0, dtype=float)
    grid = PeriodicGrid(L, N, tuple(z0))
    ell = float(scenario.core(scenario.t0))
    field0 = init_gaussian(grid, scenario.Gamma, ell, z0)
    snap = Snapshot(scenario.t0, field0)
    return l1_error(snap, omega_app(scenario.Gamma, ell, z0, scenario.flow, scenario.t0), scenario.Gamma)


__all__ = ["RunResult", "RelaxationSample", "TrackingRecord", "approx_field", "box_side",
           "initial_gap", "relaxation_run", "tracking_run"]
