"""Kernel functions and radial boundary-value machinery for angular modes.

All quantities live in the self-similar variable xi, with r = |xi|.  A vorticity
mode of wavenumber n is written ``c(r) cos(n theta) + s(r) sin(n theta)``.  The
linearized advection operator around the Gaussian vortex,

    Lambda W = U0 . grad W + BS[W] . grad Omega0,

maps such a mode to a mode of the same wavenumber with cos and sin exchanged.
Its action and its inverse reduce to second-order radial ODEs which are
discretized here with a conservative finite-volume scheme on a uniform grid.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
from scipy.integrate import simpson
from scipy.linalg import solve_banded
from scipy.sparse.linalg import splu

from .errors import ConvergenceFailure, SolvabilityViolation

DEFAULT_R_MAX = 30.0
DEFAULT_DR = 0.0025
TAYLOR_CUTOFF = 1e-3
SOLVABILITY_TOL = 1e-8
_HALF = 4  # half-width of the derivative stencils (8th order in the interior)


# ---------------------------------------------------------------------------
# grids and profile containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Uniform radial grid ``0 = r_0 < r_1 < ... < r_M = R_max``."""

    nodes: np.ndarray
    rule: str = "uniform"
    min_r_max: float = 20.0

    def __post_init__(self):
        r = np.asarray(self.nodes, dtype=float)
        if r.ndim != 1 or r.size < 2 * _HALF + 2:
            raise ValueError("radial grid needs at least 10 nodes")
        if r[0] != 0.0:
            raise ValueError("radial grid must start at r = 0")
        dr = np.diff(r)
        if np.any(dr <= 0):
            raise ValueError("radial grid must be strictly increasing")
        if self.rule != "uniform" or np.ptp(dr) > 1e-9 * dr[0]:
            raise ValueError("only uniform radial grids are supported")
        if r[-1] < self.min_r_max:
            raise ValueError(f"R_max = {r[-1]} is below {self.min_r_max}")
        r.setflags(write=False)
        object.__setattr__(self, "nodes", r)

    @classmethod
    def uniform(cls, r_max: float = DEFAULT_R_MAX, dr: float = DEFAULT_DR,
                min_r_max: float = 20.0) -> "RadialGrid":
        m = int(round(r_max / dr))
        return cls(np.linspace(0.0, r_max, m + 1), "uniform", min_r_max)

    @property
    def r(self) -> np.ndarray:
        return self.nodes

    @property
    def dr(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def size(self) -> int:
        return self.nodes.size

    def index(self, radius: float) -> int:
        """Index of the node closest to ``radius``."""
        return int(np.clip(round(radius / self.dr), 0, self.size - 1))


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Scalar function of r sampled on a radial grid.

    ``origin_order`` is the power p with value = O(r^p) at the origin and
    ``decay_class`` is one of ``gaussian``, ``algebraic`` or ``bounded``.
    """

    grid: RadialGrid
    values: np.ndarray
    origin_order: int = 0
    decay_class: str = "bounded"
    decay_power: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.nodes.shape:
            raise ValueError("profile values do not match the grid")
        if not np.all(np.isfinite(v)):
            raise ValueError("profile values must be finite")
        if self.decay_class not in ("gaussian", "algebraic", "bounded"):
            raise ValueError(f"unknown decay class {self.decay_class!r}")
        if self.decay_class == "gaussian":
            peak = np.max(np.abs(v))
            if abs(v[-1]) > 1e-10 * peak:
                raise ValueError("profile declared gaussian does not decay by R_max")
        object.__setattr__(self, "values", v)

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes

    def __call__(self, radius):
        """Interpolate the profile at arbitrary radii (cubic, zero beyond R_max)."""
        return interpolate_profile(self.grid, self.values, radius, parity=(-1) ** self.origin_order)


@dataclass(frozen=True, eq=False)
class ModeFunction:
    """Angular mode ``cos_part(r) cos(n theta) + sin_part(r) sin(n theta)``."""

    n: int
    cos_part: RadialProfile
    sin_part: RadialProfile

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("wavenumber must be nonnegative")
        if self.cos_part.grid is not self.sin_part.grid and not np.array_equal(
                self.cos_part.grid.nodes, self.sin_part.grid.nodes):
            raise ValueError("cos and sin parts live on different grids")
        if self.n == 0 and np.any(self.sin_part.values != 0.0):
            raise ValueError("an n = 0 mode has no sin part")

    @classmethod
    def from_arrays(cls, n: int, grid: RadialGrid, cos=None, sin=None,
                    decay_class: str = "bounded") -> "ModeFunction":
        zero = np.zeros(grid.size)
        c = zero if cos is None else np.asarray(cos, dtype=float)
        s = zero if sin is None else np.asarray(sin, dtype=float)
        order = n
        return cls(n, RadialProfile(grid, c, order, decay_class),
                   RadialProfile(grid, s, order, decay_class))

    @classmethod
    def zero(cls, n: int, grid: RadialGrid) -> "ModeFunction":
        return cls.from_arrays(n, grid)

    @property
    def grid(self) -> RadialGrid:
        return self.cos_part.grid

    @property
    def c(self) -> np.ndarray:
        return self.cos_part.values

    @property
    def s(self) -> np.ndarray:
        return self.sin_part.values

    def _new(self, c, s) -> "ModeFunction":
        return ModeFunction.from_arrays(self.n, self.grid, c, s)

    def __add__(self, other: "ModeFunction") -> "ModeFunction":
        if other.n != self.n:
            raise ValueError("cannot add modes of different wavenumber")
        return self._new(self.c + other.c, self.s + other.s)

    def __sub__(self, other: "ModeFunction") -> "ModeFunction":
        return self + (-other)

    def __neg__(self) -> "ModeFunction":
        return self._new(-self.c, -self.s)

    def __mul__(self, alpha: float) -> "ModeFunction":
        return self._new(alpha * self.c, alpha * self.s)

    __rmul__ = __mul__

    def norm(self) -> float:
        """Unweighted L2 norm over the plane (angular factor included)."""
        r = self.grid.r
        ang = 2 * np.pi if self.n == 0 else np.pi
        return float(np.sqrt(ang * simpson((self.c ** 2 + self.s ** 2) * r, x=r)))

    def evaluate(self, theta) -> np.ndarray:
        """Values on the tensor grid (theta, r) with shape (len(theta), M+1)."""
        theta = np.asarray(theta, dtype=float)[:, None]
        return self.c * np.cos(self.n * theta) + self.s * np.sin(self.n * theta)


class KernelValues(NamedTuple):
    v_star: np.ndarray
    g: np.ndarray
    h: np.ndarray


# ---------------------------------------------------------------------------
# kernel functions
# ---------------------------------------------------------------------------

def kernel_functions(r) -> KernelValues:
    """Return ``v_star``, ``g`` and ``h`` at radii ``r``.

    v_star = (1 - exp(-r^2/4)) / (2 pi r^2) is the angular velocity of the
    Gaussian vortex, g = exp(-r^2/4) / (8 pi) and h = g / v_star.
    Four-term Taylor series are used below ``r = 1e-3``.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be nonnegative")
    s = r * r / 4.0
    small = r < TAYLOR_CUTOFF
    ss = np.where(small, 1.0, s)
    with np.errstate(over="ignore"):
        v_big = -np.expm1(-ss) / (8.0 * np.pi * ss)
        h_big = ss / np.expm1(ss)
    v_small = (1.0 - s / 2.0 + s ** 2 / 6.0 - s ** 3 / 24.0) / (8.0 * np.pi)
    h_small = 1.0 - s / 2.0 + s ** 2 / 12.0 - s ** 4 / 720.0
    v = np.where(small, v_small, v_big)
    h = np.where(small, h_small, np.nan_to_num(h_big, nan=0.0, posinf=0.0))
    g = np.exp(-s) / (8.0 * np.pi)
    return KernelValues(v, g, h)


def gaussian_vortex(r) -> np.ndarray:
    """Radial profile exp(-r^2/4)/(4 pi) of the unit-circulation Gaussian vortex."""
    r = np.asarray(r, dtype=float)
    return np.exp(-r * r / 4.0) / (4.0 * np.pi)


# ---------------------------------------------------------------------------
# finite differences with parity at the origin
# ---------------------------------------------------------------------------

def fd_weights(offsets, m: int) -> np.ndarray:
    """Finite-difference weights for the m-th derivative at 0 from ``offsets``."""
    x = np.asarray(offsets, dtype=float)
    k = np.arange(x.size)
    a = x[None, :] ** k[:, None] / np.array([factorial(j) for j in k])[:, None]
    e = np.zeros(x.size)
    e[m] = 1.0
    return np.linalg.solve(a, e)


_CENTRAL = {m: fd_weights(np.arange(-_HALF, _HALF + 1), m) for m in (1, 2)}
_ONE_SIDED = {
    m: [fd_weights(np.arange(-2 * _HALF, 1) + j, m) for j in range(_HALF, 0, -1)]
    for m in (1, 2)
}


def radial_derivative(values, dr: float, parity: int, m: int = 1) -> np.ndarray:
    """m-th derivative (m = 1, 2) of a profile along its last axis.

    Ghost values across the origin follow ``f(-r) = parity * f(r)``; the last
    nodes use one-sided stencils of the same width.
    """
    v = np.asarray(values, dtype=float)
    size = v.shape[-1]
    ghost = parity * v[..., _HALF:0:-1]
    ext = np.concatenate([ghost, v], axis=-1)
    inner = size - _HALF
    out = np.zeros_like(v)
    for j, c in enumerate(_CENTRAL[m]):
        out[..., :inner] += c * ext[..., j:j + inner]
    tail = v[..., size - 2 * _HALF - 1:]
    for i, wts in enumerate(_ONE_SIDED[m]):
        out[..., inner + i] = tail @ wts
    return out / dr ** m


def mode_laplacian(values, grid: RadialGrid, n: int) -> np.ndarray:
    """Radial part ``f'' + f'/r - n^2 f / r^2`` of the Laplacian on mode n."""
    r = grid.r
    parity = (-1) ** n
    d1 = radial_derivative(values, grid.dr, parity, 1)
    d2 = radial_derivative(values, grid.dr, parity, 2)
    out = np.empty_like(d1)
    rr = r[1:]
    out[..., 1:] = d2[..., 1:] + d1[..., 1:] / rr - n * n * np.asarray(values)[..., 1:] / rr ** 2
    out[..., 0] = 2.0 * d2[..., 0] if n == 0 else 0.0
    return out


def interpolate_profile(grid: RadialGrid, values, radius, parity: int = 1) -> np.ndarray:
    """Cubic interpolation of a radial profile, symmetric across the origin."""
    from scipy.interpolate import CubicSpline

    r = grid.r
    v = np.asarray(values, dtype=float)
    xs = np.concatenate([-r[_HALF:0:-1], r])
    ys = np.concatenate([parity * v[_HALF:0:-1], v])
    spline = CubicSpline(xs, ys, extrapolate=False)
    rad = np.asarray(radius, dtype=float)
    out = spline(np.minimum(rad, r[-1]))
    return np.where(rad > r[-1], 0.0, out)


# ---------------------------------------------------------------------------
# radial boundary-value problems
# ---------------------------------------------------------------------------

def _fv_blocks(n: int, grid: RadialGrid, potential=None):
    """Symmetric finite-volume matrix for ``-f'' - f'/r + (n^2/r^2 - q) f``.

    Unknowns are the nodes 1..M (Dirichlet at the origin for n >= 1) and a
    Robin condition ``r f' = -n f`` closes the last half cell.  Returns the
    banded (diag, offdiag) pair and the cell volumes.
    """
    r = grid.r[1:]
    dr = grid.dr
    rp = r + dr / 2
    rm = r - dr / 2
    vol = r * dr
    vol[-1] = (r[-1] ** 2 - rm[-1] ** 2) / 2.0
    q = np.zeros_like(r) if potential is None else np.asarray(potential, dtype=float)[1:]
    diag = (rp + rm) / dr + vol * (n * n / r ** 2 - q)
    diag[-1] = n + rm[-1] / dr + vol[-1] * (n * n / r[-1] ** 2 - q[-1])
    off = -rp[:-1] / dr
    return diag, off, vol


def _banded_solve(diag, off, rhs):
    ab = np.zeros((3, diag.size))
    ab[0, 1:] = off
    ab[1] = diag
    ab[2, :-1] = off
    return solve_banded((1, 1), ab, rhs)


def _bordered_solve(diag, off, rhs, constraint):
    """Solve ``A x + mu c = rhs, c . x = 0`` with a sparse LU factorization.

    Natural ordering without pivoting keeps the fill confined to the border.
    """
    m = diag.size
    a = sp.diags([off, diag, off], [-1, 0, 1], shape=(m, m), format="csc")
    col = sp.csc_matrix(constraint[:, None])
    big = sp.bmat([[a, col], [col.T, None]], format="csc")
    lu = splu(big, permc_spec="NATURAL", diag_pivot_thresh=0.0)
    return lu.solve(np.concatenate([rhs, [0.0]]))[:-1]


def moment_integral(grid: RadialGrid, b) -> tuple[float, float]:
    """Return ``int b r^2 dr`` and ``int |b| r^2 dr`` (composite Simpson)."""
    r = grid.r
    b = np.asarray(b, dtype=float)
    return float(simpson(b * r * r, x=r)), float(simpson(np.abs(b) * r * r, x=r))


def _as_values(profile_or_array, grid=None):
    if isinstance(profile_or_array, RadialProfile):
        return profile_or_array.grid, profile_or_array.values
    return grid, np.asarray(profile_or_array, dtype=float)


def solve_phi(n: int, rhs, grid: RadialGrid | None = None,
              check_solvability: bool = True) -> RadialProfile:
    """Solve ``-phi'' - phi'/r + (n^2/r^2 - h) phi = rhs`` on mode n >= 1.

    ``phi = O(r^n)`` at the origin and ``phi = O(r^-n)`` at infinity.  For
    n = 1 the homogeneous solution ``r v_star`` is removed by requiring
    orthogonality to it in L2(r dr).  Solvability for n = 1 requires the first
    moment of ``b = v_star * rhs`` to vanish.
    """
    grid, f = _as_values(rhs, grid)
    if n < 1:
        raise ValueError("solve_phi needs n >= 1")
    kv = kernel_functions(grid.r)
    diag, off, vol = _fv_blocks(n, grid, kv.h)
    if n == 1:
        if check_solvability:
            mom, scale = moment_integral(grid, n * kv.v_star * f)
            if abs(mom) > SOLVABILITY_TOL * max(scale, 1e-300):
                raise SolvabilityViolation(
                    f"first moment {mom:.3e} of the n = 1 forcing does not vanish "
                    f"(relative {abs(mom) / scale:.2e})")
        kernel = grid.r[1:] * kv.v_star[1:]
        phi = _bordered_solve(diag, off, vol * f[1:], vol * kernel)
    else:
        phi = _banded_solve(diag, off, vol * f[1:])
    return RadialProfile(grid, np.concatenate([[0.0], phi]), n, "algebraic", n)


def solve_stream(n: int, w, grid: RadialGrid | None = None) -> np.ndarray:
    """Solve ``-phi'' - phi'/r + n^2 phi / r^2 = w`` (mode stream function)."""
    grid, wv = _as_values(w, grid)
    if n < 1:
        raise ValueError("solve_stream needs n >= 1; use azimuthal_velocity for n = 0")
    diag, off, vol = _fv_blocks(n, grid)
    phi = _banded_solve(diag, off, (vol * wv[..., 1:]).T).T
    return np.concatenate([np.zeros(wv.shape[:-1] + (1,)), phi], axis=-1)


def azimuthal_velocity(grid: RadialGrid, w) -> np.ndarray:
    """Azimuthal velocity ``r^-1 int_0^r s w(s) ds`` of a radial vorticity profile."""
    from scipy.integrate import cumulative_simpson

    r = grid.r
    cum = cumulative_simpson(np.asarray(w, dtype=float) * r, x=r, initial=0.0)
    out = np.zeros_like(cum)
    out[..., 1:] = cum[..., 1:] / r[1:]
    return out


def lambda_apply(mode: ModeFunction) -> ModeFunction:
    """Apply the linearized advection operator to a mode with n >= 1.

    For ``W = c cos + s sin`` the result is
    ``n (v_star s - g phi[s]) cos - n (v_star c - g phi[c]) sin`` where
    ``phi[w]`` is the mode stream function of w.
    """
    n = mode.n
    if n < 1:
        raise ValueError("the advection operator vanishes on radial modes")
    grid = mode.grid
    kv = kernel_functions(grid.r)
    phi = solve_stream(n, np.vstack([mode.c, mode.s]), grid)
    out_c = n * (kv.v_star * mode.s - kv.g * phi[1])
    out_s = -n * (kv.v_star * mode.c - kv.g * phi[0])
    return ModeFunction.from_arrays(n, grid, out_c, out_s)


def _w_from_forcing(n: int, grid: RadialGrid, b, check: bool) -> np.ndarray:
    kv = kernel_functions(grid.r)
    rhs = b / (n * kv.v_star)
    phi = solve_phi(n, rhs, grid, check_solvability=check).values
    return phi * kv.h + rhs


def project_kernel(grid: RadialGrid, b) -> np.ndarray:
    """Remove the component of an n = 1 forcing profile that carries a first moment.

    The correction is along ``r g``, the profile of the first Hermite pair,
    which is the weighted-orthogonal complement direction of the solvable set.
    """
    kv = kernel_functions(grid.r)
    rg = grid.r * kv.g
    mom, _ = moment_integral(grid, b)
    ref, _ = moment_integral(grid, rg)
    return np.asarray(b, dtype=float) - (mom / ref) * rg


def lambda_inverse(n: int, forcing: ModeFunction, gauge: str = "moment",
                   project: bool = False) -> ModeFunction:
    """Return W with ``lambda_apply(W) = forcing`` on mode n >= 1.

    A forcing ``b sin(n theta)`` gives ``W = -w[b] cos(n theta)`` and
    ``b cos(n theta)`` gives ``W = w[b] sin(n theta)``, with
    ``w = phi h + b / (n v_star)``.

    For n = 1 the answer is unique up to the kernel profile ``r g``.  With
    ``gauge="moment"`` that freedom is used to make the first moment of W
    vanish; ``gauge="orthogonal"`` keeps the solution of :func:`solve_phi`.
    ``project=True`` first removes any first moment of the forcing (useful
    when the forcing is itself the output of a discretized computation).
    """
    if forcing.n != n:
        raise ValueError("forcing wavenumber does not match n")
    grid = forcing.grid
    bc, bs = forcing.c, forcing.s
    if n == 1 and project:
        bc, bs = project_kernel(grid, bc), project_kernel(grid, bs)
    w_c = _w_from_forcing(n, grid, bc, check=True) if np.any(bc) else np.zeros(grid.size)
    w_s = _w_from_forcing(n, grid, bs, check=True) if np.any(bs) else np.zeros(grid.size)
    if n == 1:
        if gauge == "moment":
            w_c, w_s = _zero_moment(grid, w_c), _zero_moment(grid, w_s)
        elif gauge != "orthogonal":
            raise ValueError(f"unknown gauge {gauge!r}")
    return ModeFunction.from_arrays(n, grid, cos=-w_s, sin=w_c)


def _zero_moment(grid: RadialGrid, w) -> np.ndarray:
    kv = kernel_functions(grid.r)
    rg = grid.r * kv.g
    mom, _ = moment_integral(grid, w)
    ref, _ = moment_integral(grid, rg)
    return w - (mom / ref) * rg


def w2_profile(grid: RadialGrid | None = None, tol: float = 1e-9) -> RadialProfile:
    """Quadrupole profile ``w2 = h (phi2 + r^2/2)``.

    phi2 solves the n = 2 equation with right side ``r^2 h / 2``.  The result
    is positive for r > 0, O(r^2) at the origin and ~ (r^4/8) exp(-r^2/4) at
    large r.
    """
    grid = grid or RadialGrid.uniform()
    if grid.r_max < 20.0:
        raise ValueError("w2_profile needs R_max >= 20")
    r = grid.r
    kv = kernel_functions(r)
    rhs = r * r * kv.h / 2.0
    phi = solve_phi(2, rhs, grid).values
    diag, off, vol = _fv_blocks(2, grid, kv.h)
    resid = diag * phi[1:]
    resid[1:] += off * phi[1:-1]
    resid[:-1] += off * phi[2:]
    resid -= vol * rhs[1:]
    rel = np.max(np.abs(resid)) / np.max(np.abs(vol * rhs[1:]))
    if not rel <= tol:
        raise ConvergenceFailure(f"w2 boundary-value residual {rel:.2e} exceeds {tol:.1e}")
    w = kv.h * (phi + r * r / 2.0)
    w[np.abs(w) < 1e-300] = 0.0
    return RadialProfile(grid, w, 2, "gaussian")


@dataclass(frozen=True, eq=False)
class ModeVelocity:
    """Velocity of a vorticity mode in polar components.

    ``radial`` and ``tangential`` are modes of the same wavenumber holding
    the cos/sin amplitudes of U_r and U_theta; ``phi_cos``/``phi_sin`` are
    the stream-function amplitudes.
    """

    radial: ModeFunction
    tangential: ModeFunction
    phi_cos: np.ndarray = field(repr=False)
    phi_sin: np.ndarray = field(repr=False)


def velocity_from_mode(mode: ModeFunction, phi=None) -> ModeVelocity:
    """Biot-Savart velocity of a mode via its stream function.

    With ``psi = -phi[c] cos(n theta) - phi[s] sin(n theta)``,
    ``U_r = (n/r) phi[s] cos - (n/r) phi[c] sin`` and
    ``U_theta = -phi[c]' cos - phi[s]' sin``.  For n = 0 the velocity is
    purely azimuthal.  ``phi`` may supply precomputed stream amplitudes.
    """
    n = mode.n
    grid = mode.grid
    r = grid.r
    if n == 0:
        ut = azimuthal_velocity(grid, mode.c)
        zero = np.zeros_like(r)
        return ModeVelocity(ModeFunction.zero(0, grid),
                            ModeFunction.from_arrays(0, grid, ut), zero, zero)
    if phi is None:
        phi = solve_stream(n, np.vstack([mode.c, mode.s]), grid)
    phi_c, phi_s = phi[0], phi[1]
    parity = (-1) ** n
    dphi = radial_derivative(np.vstack([phi_c, phi_s]), grid.dr, parity, 1)
    ur_c = np.zeros_like(r)
    ur_s = np.zeros_like(r)
    ur_c[1:] = n * phi_s[1:] / r[1:]
    ur_s[1:] = -n * phi_c[1:] / r[1:]
    if n == 1:
        ur_c[0], ur_s[0] = dphi[1][0], -dphi[0][0]
    radial = ModeFunction.from_arrays(n, grid, ur_c, ur_s)
    tangential = ModeFunction.from_arrays(n, grid, -dphi[0], -dphi[1])
    return ModeVelocity(radial, tangential, phi_c, phi_s)


def write_profile_csv(path, profile: RadialProfile, n: int, part: str) -> None:
    """Write ``r,value`` rows under a ``# n=<n> part=<cos|sin>`` header."""
    if part not in ("cos", "sin"):
        raise ValueError("part must be 'cos' or 'sin'")
    data = np.column_stack([profile.r, profile.values])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n={n} part={part}\n")
        fh.write("r,value\n")
        np.savetxt(fh, data, delimiter=",", fmt="%.17g")


def read_profile_csv(path) -> tuple[int, str, np.ndarray, np.ndarray]:
    """Inverse of :func:`write_profile_csv`; returns ``(n, part, r, values)``."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().lstrip("#").split()
        meta = dict(item.split("=") for item in header)
        data = np.loadtxt(fh, delimiter=",", skiprows=1, ndmin=2)
    return int(meta["n"]), meta["part"], data[:, 0], data[:, 1]
