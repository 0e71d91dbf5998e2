"""Per-mode discretization of the diffusion and advection operators.

A mode ``c(r) cos(n theta) + s(r) sin(n theta)`` is stored as the complex
amplitude ``u = c + i s``.  In the Gaussian-weighted space (weight
``p = exp(r^2/4)``) the diffusion operator ``L = Laplacian + (r/2) d_r + 1``
is self-adjoint, and the linearized advection operator acts as
``Lambda u = -i n K u`` with ``K = v_star - g (-Laplacian_n)^{-1}``, which is
self-adjoint as well, so ``Lambda`` is skew-adjoint.

The discrete operators keep both structures exactly:

* ``L`` is a finite-volume scheme whose weighted matrix ``D L`` (``D`` the node
  weights ``p r dr``) is symmetric;
* the inverse Laplacian is a quadrature of its Green's function, and because
  ``p g`` is constant the product ``D g G`` is symmetric.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh, lu_factor, lu_solve

from .errors import InsufficientDecay, StepInstability
from .radial_profiles import RadialGrid, kernel_functions

LINEAR_R_MAX = 14.0
LINEAR_DR = 0.035
_SDIRK = 1.0 - 1.0 / np.sqrt(2.0)


def linear_grid(r_max: float = LINEAR_R_MAX, dr: float = LINEAR_DR) -> RadialGrid:
    """Radial grid for weighted-space computations (the weight caps R_max)."""
    return RadialGrid.uniform(r_max, dr, min_r_max=min(r_max, 8.0))


@dataclass(frozen=True, eq=False)
class ModeOperator:
    """Matrices of L and Lambda restricted to wavenumber n.

    Unknowns are the nodes ``r_1 .. r_{M-1}`` for ``n >= 1`` and
    ``r_0 .. r_{M-1}`` for ``n = 0``; the value at ``R_max`` is zero.
    ``weights`` are the node weights of the discrete weighted product,
    which carries an extra factor ``pi`` (``2 pi`` for n = 0) from the
    angular integral.
    """

    n: int
    grid: RadialGrid
    radii: np.ndarray
    weights: np.ndarray
    L: np.ndarray
    K: np.ndarray
    green: np.ndarray

    @property
    def Lambda(self) -> np.ndarray:
        """Complex matrix of Lambda acting on ``c + i s``."""
        return -1j * self.n * self.K

    def inner(self, u, v) -> complex:
        """Weighted product ``<u, v>`` (conjugate-linear in u)."""
        return complex(np.sum(self.weights * np.conj(u) * v))

    def norm(self, u) -> float:
        return float(np.sqrt(np.sum(self.weights * np.abs(u) ** 2)))

    def gradient_norm_sq(self, u) -> float:
        """Discrete ``||grad w||^2`` in the weighted space (the Dirichlet form)."""
        return float(np.real(self.inner(u, u - self.L @ u)))

    def from_profiles(self, cos=None, sin=None) -> np.ndarray:
        """Complex unknown vector from profiles sampled on the full grid."""
        m = self.grid.size
        c = np.zeros(m) if cos is None else np.asarray(cos, dtype=float)
        s = np.zeros(m) if sin is None else np.asarray(sin, dtype=float)
        lo = 0 if self.n == 0 else 1
        return (c + 1j * s)[lo:m - 1]

    def to_profiles(self, u) -> tuple[np.ndarray, np.ndarray]:
        """Cos and sin profiles on the full grid (zero at excluded nodes)."""
        m = self.grid.size
        lo = 0 if self.n == 0 else 1
        full = np.zeros(m, dtype=complex)
        full[lo:m - 1] = u
        return full.real.copy(), full.imag.copy()


def _weight(r):
    return np.exp(r * r / 4)


def assemble_operators(n: int, grid: RadialGrid | None = None) -> ModeOperator:
    """Weighted finite-volume L_n and Green's-function Lambda_n for wavenumber n."""
    if n < 0:
        raise ValueError("wavenumber must be nonnegative")
    grid = grid or linear_grid()
    r_all, h = grid.r, grid.dr
    lo = 0 if n == 0 else 1
    r = r_all[lo:-1]
    size = r.size
    ang = 2 * np.pi if n == 0 else np.pi

    # node volumes: half cell at the origin for n = 0
    vol = r * h
    if n == 0:
        vol = vol.copy()
        vol[0] = h * h / 8
    weights = ang * _weight(r) * vol

    # fluxes p(r) r / h across faces r_j + h/2
    faces = r + h / 2
    flux = _weight(faces) * faces / h
    stiff = np.zeros((size, size))
    idx = np.arange(size)
    stiff[idx, idx] += flux
    stiff[idx[:-1], idx[:-1] + 1] -= flux[:-1]
    stiff[idx[:-1] + 1, idx[:-1]] -= flux[:-1]
    stiff[idx[1:], idx[1:]] += flux[:-1]
    if n >= 1:
        # face between the origin (value 0) and r_1
        f0 = _weight(h / 2) * (h / 2) / h
        stiff[0, 0] += f0
        stiff += np.diag(_weight(r) * vol * n * n / (r * r))
    # stiff is (1/ang) times the weighted Dirichlet form; L = 1 - D^{-1} stiff
    L = np.eye(size) - stiff / (weights / ang)[:, None]

    if n == 0:
        K = np.zeros((size, size))
        green = np.zeros((size, size))
    else:
        kv = kernel_functions(r)
        ratio = np.minimum.outer(r, r) / np.maximum.outer(r, r)
        green = ratio ** n / (2 * n) * (r * h)[None, :]
        # second-order correction for the kink of the Green's function on the diagonal
        green -= (h * h / 12) * np.eye(size)
        K = np.diag(kv.v_star) - kv.g[:, None] * green
    return ModeOperator(n, grid, r, weights, L, K, green)


def kernel_vector(op: ModeOperator) -> np.ndarray | None:
    """Discrete kernel element of Lambda for n = 1 (the translation mode)."""
    if op.n != 1:
        return None
    r = op.radii
    return (-0.5 * r * np.exp(-r * r / 4) / (4 * np.pi)).astype(complex)


def project_out_kernel(op: ModeOperator, u) -> np.ndarray:
    """Remove kernel components of Lambda with the discrete weighted product.

    For n = 1 the kernel pair ``d_1 Omega0, d_2 Omega0`` corresponds to the
    real and imaginary multiples of one real profile; for n = 0 every radial
    function is in the kernel and the whole vector is removed.
    """
    u = np.asarray(u, dtype=complex)
    if op.n == 0:
        return np.zeros_like(u)
    k = kernel_vector(op)
    if k is None:
        return u.copy()
    # complex projection handles the cos and sin partners at once
    return u - k * op.inner(k, u) / op.inner(k, k).real


@dataclass(frozen=True)
class LinearHistory:
    tau: np.ndarray
    norm: np.ndarray
    grad_sq: np.ndarray
    delta: float
    n: int


def evolve_linear(op: ModeOperator, phi0, delta: float, tau_max: float, dtau: float,
                  diffusion: bool = True, project: bool = True,
                  record_every: int = 1, stop_ratio: float | None = None) -> LinearHistory:
    """Integrate ``du/dtau = (L - Lambda/delta) u`` with two-stage L-stable SDIRK.

    ``delta = inf`` switches the advection off; ``diffusion=False`` keeps only
    the advection term.  Norms and Dirichlet forms are recorded every
    ``record_every`` steps.  With ``stop_ratio`` the run ends once the norm
    falls below that fraction of its initial value.
    """
    if not dtau > 0 or not tau_max > 0:
        raise ValueError("time step and horizon must be positive")
    u = np.asarray(phi0, dtype=complex)
    if project:
        u = project_out_kernel(op, u)
    size = u.size
    A = np.zeros((size, size), dtype=complex)
    if diffusion:
        A += op.L
    if np.isfinite(delta):
        A -= op.Lambda / delta
    lu = lu_factor(np.eye(size) - _SDIRK * dtau * A)
    steps = int(np.ceil(tau_max / dtau - 1e-9))
    taus, norms, grads = [0.0], [op.norm(u)], [op.gradient_norm_sq(u)]
    for k in range(1, steps + 1):
        before = norms[-1] if (k - 1) % record_every == 0 else op.norm(u)
        k1 = lu_solve(lu, A @ u)
        k2 = lu_solve(lu, A @ (u + (1 - _SDIRK) * dtau * k1))
        u = u + dtau * ((1 - _SDIRK) * k1 + _SDIRK * k2)
        now = op.norm(u)
        if not np.isfinite(now) or now > 10 * before:
            raise StepInstability(f"norm grew from {before:.3e} to {now:.3e} at step {k}")
        if k % record_every == 0 or k == steps:
            taus.append(k * dtau)
            norms.append(now)
            grads.append(op.gradient_norm_sq(u))
            if stop_ratio is not None and now < stop_ratio * norms[0]:
                break
    return LinearHistory(np.array(taus), np.array(norms), np.array(grads), float(delta), op.n)


def energy_defect(op: ModeOperator, hist: LinearHistory) -> float:
    """Relative defect of ``|w|^2 + 2 int |grad w|^2 = |w0|^2 + 2 int |w|^2``."""
    tau = hist.tau
    lhs = hist.norm ** 2 + 2 * _cumtrapz(hist.grad_sq, tau)
    rhs = hist.norm[0] ** 2 + 2 * _cumtrapz(hist.norm ** 2, tau)
    return float(np.max(np.abs(lhs - rhs)) / hist.norm[0] ** 2)


def _cumtrapz(y, x):
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))
    return out


def decay_rate(history, tau=None, upper: float = 0.5, lower: float = 0.01) -> float:
    """Least-squares slope of ``-log ||w||`` over the decay window.

    The window opens where the norm first drops below ``upper`` times its
    initial value and closes where it first drops below ``lower`` times it.
    Accepts a :class:`LinearHistory` or a pair of arrays.
    """
    if isinstance(history, LinearHistory):
        tau, norm = history.tau, history.norm
    else:
        norm = np.asarray(history, dtype=float)
        tau = np.arange(norm.size, dtype=float) if tau is None else np.asarray(tau, dtype=float)
    if norm.size < 2 or not norm[0] > 0:
        raise InsufficientDecay("history is too short or starts at zero")
    rel = norm / norm[0]
    start = np.flatnonzero(rel < upper)
    stop = np.flatnonzero(rel < lower)
    if start.size == 0 or stop.size == 0 or stop[0] - start[0] < 2:
        raise InsufficientDecay(f"norm did not fall from {upper} to {lower} of its initial value")
    sl = slice(start[0], stop[0] + 1)
    slope = np.polyfit(tau[sl], np.log(rel[sl]), 1)[0]
    return float(-slope)


def spectrum(op: ModeOperator, count: int | None = None) -> np.ndarray:
    """Eigenvalues of L_n in decreasing order (symmetric generalized problem)."""
    D = op.weights
    stiff = (D[:, None] * (np.eye(D.size) - op.L))
    stiff = 0.5 * (stiff + stiff.T)
    vals = 1.0 - eigh(stiff, np.diag(D), eigvals_only=True)
    return vals if count is None else vals[:count]


def skew_defect(op: ModeOperator) -> float:
    """``||D Lambda + (D Lambda)^*|| / ||D Lambda||`` (zero for exact skew-adjointness)."""
    M = op.weights[:, None] * op.Lambda
    scale = np.linalg.norm(M)
    return 0.0 if scale == 0 else float(np.linalg.norm(M + M.conj().T) / scale)


def symmetry_defect(op: ModeOperator) -> float:
    M = op.weights[:, None] * op.L
    return float(np.linalg.norm(M - M.T) / np.linalg.norm(M))
