"""Finite sums of angular modes and their evaluation on polar grids.

A :class:`ModeSum` maps wavenumbers to :class:`ModeFunction` objects sharing
one radial grid.  Pointwise products of such fields are formed by sampling on
``n_theta`` equispaced angles and projecting back with a real FFT, which is
exact for trigonometric polynomials of degree below ``n_theta / 2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .radial_profiles import (
    ModeFunction, RadialGrid, azimuthal_velocity, interpolate_profile, mode_laplacian,
    radial_derivative, solve_stream,
)


def angles(n_theta: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n_theta) / n_theta


@dataclass(frozen=True, eq=False)
class ModeSum:
    """Field ``sum_n c_n(r) cos(n theta) + s_n(r) sin(n theta)``."""

    grid: RadialGrid
    modes: dict = field(default_factory=dict)

    @classmethod
    def from_modes(cls, grid: RadialGrid, *modes: ModeFunction) -> "ModeSum":
        out = cls(grid, {})
        for m in modes:
            out = out + cls(grid, {m.n: m})
        return out

    @classmethod
    def radial(cls, grid: RadialGrid, values) -> "ModeSum":
        return cls(grid, {0: ModeFunction.from_arrays(0, grid, values)})

    def __add__(self, other: "ModeSum") -> "ModeSum":
        modes = dict(self.modes)
        for n, m in other.modes.items():
            modes[n] = modes[n] + m if n in modes else m
        return ModeSum(self.grid, modes)

    def __sub__(self, other: "ModeSum") -> "ModeSum":
        return self + (-1.0) * other

    def __mul__(self, alpha: float) -> "ModeSum":
        return ModeSum(self.grid, {n: alpha * m for n, m in self.modes.items()})

    __rmul__ = __mul__

    def __neg__(self) -> "ModeSum":
        return (-1.0) * self

    @property
    def wavenumbers(self) -> list[int]:
        return sorted(self.modes)

    def mode(self, n: int) -> ModeFunction:
        return self.modes.get(n, ModeFunction.zero(n, self.grid))

    def truncate(self, keep) -> "ModeSum":
        return ModeSum(self.grid, {n: m for n, m in self.modes.items() if n in keep})

    def max_abs(self) -> float:
        if not self.modes:
            return 0.0
        return max(max(np.max(np.abs(m.c)), np.max(np.abs(m.s))) for m in self.modes.values())

    # -- sampling -----------------------------------------------------------
    def sample(self, theta, idx=slice(None)) -> np.ndarray:
        """Values on (theta, r[idx]); shape ``(len(theta), len(r[idx]))``."""
        theta = np.asarray(theta, dtype=float)[:, None]
        r = self.grid.r[idx]
        out = np.zeros((theta.shape[0], r.size))
        for n, m in self.modes.items():
            out += m.c[idx] * np.cos(n * theta) + m.s[idx] * np.sin(n * theta)
        return out

    def gradient(self, theta, idx=slice(None)):
        """Polar gradient components ``(d_r W, r^-1 d_theta W)`` on (theta, r[idx])."""
        theta = np.asarray(theta, dtype=float)[:, None]
        r = self.grid.r
        dr_out = np.zeros((theta.shape[0], r[idx].size))
        dt_out = np.zeros_like(dr_out)
        for n, m in self.modes.items():
            d = radial_derivative(np.vstack([m.c, m.s]), self.grid.dr, (-1) ** n, 1)
            cos, sin = np.cos(n * theta), np.sin(n * theta)
            dr_out += d[0][idx] * cos + d[1][idx] * sin
            if n == 0:
                continue
            over_r = np.zeros((2, r.size))
            over_r[:, 1:] = np.vstack([m.c, m.s])[:, 1:] / r[1:]
            if n == 1:
                over_r[:, 0] = d[:, 0]
            dt_out += n * (-over_r[0][idx] * sin + over_r[1][idx] * cos)
        return dr_out, dt_out

    def at_points(self, xi) -> np.ndarray:
        """Evaluate at arbitrary Cartesian points ``xi[..., 2]`` (cubic in r)."""
        xi = np.asarray(xi, dtype=float)
        rad = np.hypot(xi[..., 0], xi[..., 1])
        th = np.arctan2(xi[..., 1], xi[..., 0])
        out = np.zeros(rad.shape)
        for n, m in self.modes.items():
            par = (-1) ** n
            if np.any(m.c):
                out += interpolate_profile(self.grid, m.c, rad, par) * np.cos(n * th)
            if np.any(m.s):
                out += interpolate_profile(self.grid, m.s, rad, par) * np.sin(n * th)
        return out

    def resample(self, grid: RadialGrid) -> "ModeSum":
        """Interpolate every mode onto another radial grid (zero beyond R_max)."""
        out = {}
        for n, m in self.modes.items():
            par = (-1) ** n
            c = interpolate_profile(self.grid, m.c, grid.r, par)
            s = interpolate_profile(self.grid, m.s, grid.r, par) if n else None
            out[n] = ModeFunction.from_arrays(n, grid, c, s)
        return ModeSum(grid, out)

    # -- operators ------------------------------------------------------------
    def laplacian(self) -> "ModeSum":
        out = {}
        for n, m in self.modes.items():
            lap = mode_laplacian(np.vstack([m.c, m.s]), self.grid, n)
            out[n] = ModeFunction.from_arrays(n, self.grid, lap[0], lap[1] if n else None)
        return ModeSum(self.grid, out)

    def diffusion(self) -> "ModeSum":
        """``(Laplacian + (r/2) d_r + 1) W`` per mode."""
        out = {}
        r = self.grid.r
        for n, m in self.modes.items():
            vals = np.vstack([m.c, m.s])
            lap = mode_laplacian(vals, self.grid, n)
            d1 = radial_derivative(vals, self.grid.dr, (-1) ** n, 1)
            res = lap + 0.5 * r * d1 + vals
            out[n] = ModeFunction.from_arrays(n, self.grid, res[0], res[1] if n else None)
        return ModeSum(self.grid, out)

    def velocity(self, theta, idx=slice(None)):
        """Biot-Savart velocity ``(U_r, U_theta)`` sampled on (theta, r[idx])."""
        theta = np.asarray(theta, dtype=float)[:, None]
        r = self.grid.r
        ur = np.zeros((theta.shape[0], r[idx].size))
        ut = np.zeros_like(ur)
        for n, m in self.modes.items():
            if n == 0:
                ut += azimuthal_velocity(self.grid, m.c)[idx]
                continue
            phi = solve_stream(n, np.vstack([m.c, m.s]), self.grid)
            dphi = radial_derivative(phi, self.grid.dr, (-1) ** n, 1)
            over_r = np.zeros_like(phi)
            over_r[:, 1:] = phi[:, 1:] / r[1:]
            if n == 1:
                over_r[:, 0] = dphi[:, 0]
            cos, sin = np.cos(n * theta), np.sin(n * theta)
            ur += n * (over_r[1][idx] * cos - over_r[0][idx] * sin)
            ut += -dphi[0][idx] * cos - dphi[1][idx] * sin
        return ur, ut

    # -- integrals ------------------------------------------------------------
    def circulation(self) -> float:
        r = self.grid.r
        return float(2 * np.pi * simpson(self.mode(0).c * r, x=r))

    def first_moments(self) -> np.ndarray:
        r = self.grid.r
        m1 = self.mode(1)
        return np.pi * np.array([simpson(m1.c * r * r, x=r), simpson(m1.s * r * r, x=r)])


def project(grid: RadialGrid, samples, n_max: int, keep=None) -> ModeSum:
    """Project samples on (theta_j, r) with equispaced theta onto modes ``<= n_max``."""
    samples = np.asarray(samples, dtype=float)
    n_theta = samples.shape[0]
    if n_max >= n_theta // 2:
        raise ValueError("too few angles for the requested wavenumbers")
    coef = np.fft.rfft(samples, axis=0) / n_theta
    modes = {}
    for n in range(n_max + 1):
        if keep is not None and n not in keep:
            continue
        if n == 0:
            modes[0] = ModeFunction.from_arrays(0, grid, coef[0].real)
        else:
            modes[n] = ModeFunction.from_arrays(n, grid, 2 * coef[n].real, -2 * coef[n].imag)
    return ModeSum(grid, modes)


def mode_content(grid: RadialGrid, samples, n: int) -> float:
    """Largest amplitude of wavenumber n in the samples (for bookkeeping checks)."""
    coef = np.fft.rfft(np.asarray(samples, dtype=float), axis=0) / samples.shape[0]
    return float(np.max(np.abs(coef[n])) * (1 if n == 0 else 2))
