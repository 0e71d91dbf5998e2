"""External velocity fields with closed-form derivatives.

Each catalog flow provides f(x, t) and its spatial derivative tensors up to
order four.  Derivative tensors have shape ``x.shape[:-1] + (2,) * (k + 1)``
with the velocity component first, so ``D[..., i, j1, ..., jk]`` is
``d^k f_i / dx_j1 ... dx_jk``.

The characteristic time is ``T0 = 1 / sup |Df|`` where ``|A|`` is the sum of
the absolute values of all entries of a derivative tensor.  With this choice
the linear strain ``(gamma/2)(-x1, x2)`` has ``T0 = 1/gamma``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .errors import UnknownKind

MAX_ORDER = 4


@dataclass(frozen=True)
class StrainRates:
    """Symmetric (a, b) and antisymmetric (c) parts of the Jacobian."""

    a: float
    b: float
    c: float


def tensor_norm(tensor, k: int) -> np.ndarray:
    """Entrywise l1 norm of derivative tensors over their last ``k + 1`` axes."""
    t = np.abs(np.asarray(tensor))
    return t.reshape(t.shape[: t.ndim - (k + 1)] + (-1,)).sum(axis=-1)


@dataclass(frozen=True)
class ExternalFlow:
    """Base class for catalog flows; subclasses implement ``_derivative``."""

    name: str = "flow"
    parameters: dict = field(default_factory=dict)

    def velocity(self, x, t: float = 0.0) -> np.ndarray:
        return self.derivative(x, t, 0)

    def derivative(self, x, t: float, k: int) -> np.ndarray:
        if not 0 <= k <= MAX_ORDER:
            raise ValueError("derivative order must be between 0 and 4")
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != 2:
            raise ValueError("points must have a trailing axis of length 2")
        return self._derivative(x, t, k)

    def _derivative(self, x, t, k):  # pragma: no cover - abstract
        raise NotImplementedError

    def jacobian(self, x, t: float = 0.0) -> np.ndarray:
        return self.derivative(x, t, 1)

    def laplacian(self, x, t: float = 0.0) -> np.ndarray:
        d2 = self.derivative(x, t, 2)
        return d2[..., 0, 0] + d2[..., 1, 1]

    def time_derivative(self, x, t: float = 0.0, k: int = 0) -> np.ndarray:
        """Time derivative of ``D^k f``; catalog flows are steady."""
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (2,) * (k + 1))

    @property
    def T0(self) -> float:
        """Characteristic time from the closed-form supremum of |Df|."""
        sup = self.sup_norm(1)
        return np.inf if sup == 0 else 1.0 / sup

    def sup_norm(self, k: int) -> float:  # pragma: no cover - abstract
        raise NotImplementedError


@dataclass(frozen=True)
class ZeroFlow(ExternalFlow):
    name: str = "zero"

    def _derivative(self, x, t, k):
        return np.zeros(x.shape[:-1] + (2,) * (k + 1))

    def sup_norm(self, k: int) -> float:
        return 0.0


@dataclass(frozen=True)
class AffineFlow(ExternalFlow):
    """Linear field ``f(x) = A x`` with a traceless matrix A."""

    matrix: tuple = ((0.0, 0.0), (0.0, 0.0))

    def _derivative(self, x, t, k):
        a = np.asarray(self.matrix, dtype=float)
        if k == 0:
            return x @ a.T
        if k == 1:
            return np.broadcast_to(a, x.shape[:-1] + (2, 2)).copy()
        return np.zeros(x.shape[:-1] + (2,) * (k + 1))

    def sup_norm(self, k: int) -> float:
        if k == 0:
            return np.inf
        return float(np.abs(self.matrix).sum()) if k == 1 else 0.0


def linear_strain(gamma: float) -> AffineFlow:
    """``f = (gamma/2)(-x1, x2)``."""
    g = float(gamma)
    return AffineFlow("linear_strain", {"gamma": g}, ((-g / 2, 0.0), (0.0, g / 2)))


def rotating_strain(gamma: float, omega_r: float) -> AffineFlow:
    """Linear strain plus the rigid rotation ``omega_r (-x2, x1) / 2``."""
    g, w = float(gamma), float(omega_r)
    return AffineFlow("rotating_strain", {"gamma": g, "omega_r": w},
                      ((-g / 2, -w / 2), (w / 2, g / 2)))


@dataclass(frozen=True)
class CellularFlow(ExternalFlow):
    """``f = U (-sin(x1/Lc) cos(x2/Lc), cos(x1/Lc) sin(x2/Lc))``.

    Stream function ``U Lc sin(x1/Lc) sin(x2/Lc)``; the origin is a hyperbolic
    stagnation point.
    """

    name: str = "cellular"
    U: float = 1.0
    Lc: float = 1.0

    def _derivative(self, x, t, k):
        u1 = x[..., 0] / self.Lc
        u2 = x[..., 1] / self.Lc
        out = np.empty(x.shape[:-1] + (2,) * (k + 1))
        scale = self.U / self.Lc ** k
        for idx in itertools.product((0, 1), repeat=k):
            j1 = idx.count(0)
            j2 = k - j1
            p1 = u1 + j1 * np.pi / 2
            p2 = u2 + j2 * np.pi / 2
            out[(Ellipsis, 0) + idx] = -scale * np.sin(p1) * np.cos(p2)
            out[(Ellipsis, 1) + idx] = scale * np.cos(p1) * np.sin(p2)
        return out

    def sup_norm(self, k: int) -> float:
        # every order-k derivative tensor sums to 2^k U / Lc^k at worst
        return 2.0 ** k * self.U / self.Lc ** k


FLOW_KINDS = ("zero", "linear_strain", "rotating_strain", "cellular")


def make_flow(kind: str, **params) -> ExternalFlow:
    """Build a catalog flow.

    Kinds: ``zero``, ``linear_strain(gamma)``, ``rotating_strain(gamma,
    omega_r)`` and ``cellular(U, Lc)``.
    """
    def positive(key):
        if key not in params:
            raise ValueError(f"flow parameter {key!r} is required for {kind}")
        val = float(params[key])
        if not val > 0:
            raise ValueError(f"flow parameter {key!r} must be positive")
        return val

    if kind == "zero":
        return ZeroFlow()
    if kind == "linear_strain":
        return linear_strain(positive("gamma"))
    if kind == "rotating_strain":
        return rotating_strain(positive("gamma"), float(params.get("omega_r", 0.0)))
    if kind == "cellular":
        u, lc = positive("U"), positive("Lc")
        return CellularFlow("cellular", {"U": u, "Lc": lc}, u, lc)
    raise UnknownKind(f"unknown flow kind {kind!r}; expected one of {FLOW_KINDS}")


def strain_rates(flow: ExternalFlow, z, t: float = 0.0) -> StrainRates:
    """Strain rates ``a = (d1f1 - d2f2)/2``, ``b = (d1f2 + d2f1)/2``, ``c = (d1f2 - d2f1)/2``."""
    j = flow.jacobian(np.asarray(z, dtype=float), t)
    a = 0.5 * (j[0, 0] - j[1, 1])
    b = 0.5 * (j[1, 0] + j[0, 1])
    c = 0.5 * (j[1, 0] - j[0, 1])
    return StrainRates(float(a), float(b), float(c))


def contract(tensor, xi) -> np.ndarray:
    """Contract every index after the component index with ``xi``."""
    xi = np.asarray(xi, dtype=float)
    out = np.asarray(tensor)
    k = out.ndim - xi.ndim
    for _ in range(k):
        # last axis is a derivative index; contract it with xi
        shape = xi.shape[:-1] + (1,) * (out.ndim - xi.ndim) + (2,)
        out = (out * xi.reshape(shape)).sum(axis=-1)
    return out


def expansion_term(flow: ExternalFlow, z, t: float, k: int, xi, T0: float, d: float,
                   zprime=None, hatted: bool = False) -> np.ndarray:
    """Order-k term of the Taylor expansion of the rescaled external velocity.

    ``E1 = (T0/d)(f(z) - z')``, ``E2 = T0 Df[xi]``, ``E3 = T0 d D^2f[xi,xi]/2``,
    ``E4 = T0 d^2 D^3f[xi,xi,xi]/6``.  The hatted variants drop ``E1`` and use
    ``T0 d (D^2f[xi,xi]/2 - Laplacian f)`` for the third-order term.
    """
    if k not in (1, 2, 3, 4):
        raise ValueError("expansion order must be 1..4")
    z = np.asarray(z, dtype=float)
    xi = np.asarray(xi, dtype=float)
    shape = xi.shape
    if k == 1:
        if hatted:
            return np.zeros(shape)
        if zprime is None:
            raise ValueError("E1 needs z'(t)")
        val = (T0 / d) * (flow.velocity(z, t) - np.asarray(zprime, dtype=float))
        return np.broadcast_to(val, shape).copy()
    tensor = flow.derivative(z, t, k - 1)
    tensor = np.broadcast_to(tensor, shape[:-1] + tensor.shape)
    poly = contract(tensor, xi) / factorial(k - 1)
    out = T0 * d ** (k - 2) * poly
    if k == 3 and hatted:
        out = out - T0 * d * flow.laplacian(z, t)
    return out


def full_expansion(flow: ExternalFlow, z, zprime, t: float, eps: float, xi,
                   T0: float, d: float) -> np.ndarray:
    """Rescaled external velocity ``eps (T0/d) (f(z + eps d xi) - z')``."""
    z = np.asarray(z, dtype=float)
    xi = np.asarray(xi, dtype=float)
    x = z + eps * d * xi
    return eps * (T0 / d) * (flow.velocity(x, t) - np.asarray(zprime, dtype=float))


@dataclass(frozen=True)
class FlowMetrics:
    T0_est: float
    K_est: float


def flow_metrics(flow: ExternalFlow, box, times=(0.0,), gamma_circ: float = 1.0,
                 samples: int = 64) -> FlowMetrics:
    """Sampled characteristic time and flow-intensity constant.

    ``box = (x_min, x_max, y_min, y_max)`` is sampled by a ``samples^2``
    lattice (right edges excluded) at each of ``times``.  The intensity is
    ``(T0/d) sum_{m<=2} sum_{k<=4} T0^m d^k sup |d_t^m D^k f|`` with
    ``d = sqrt(gamma_circ T0)``.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.size == 0 or samples < 1:
        raise ValueError("empty sample set")
    x0, x1, y0, y1 = box
    gx = np.linspace(x0, x1, samples, endpoint=False)
    gy = np.linspace(y0, y1, samples, endpoint=False)
    pts = np.stack(np.meshgrid(gx, gy, indexing="ij"), axis=-1)

    def sup(k, m):
        best = 0.0
        for t in times:
            tens = flow.derivative(pts, t, k) if m == 0 else _time_derivative(flow, pts, t, k, m)
            best = max(best, float(np.max(tensor_norm(tens, k))))
        return best

    d1 = sup(1, 0)
    if d1 == 0.0:
        return FlowMetrics(np.inf, 0.0)
    T0 = 1.0 / d1
    d = np.sqrt(gamma_circ * T0)
    total = 0.0
    for m in range(3):
        for k in range(MAX_ORDER + 1):
            total += T0 ** m * d ** k * sup(k, m)
    return FlowMetrics(T0, T0 / d * total)


def _time_derivative(flow, pts, t, k, m):
    if m == 1:
        return flow.time_derivative(pts, t, k)
    # second time derivative by central differences of the first (zero for catalog flows)
    h = 1e-4
    return (flow.time_derivative(pts, t + h, k) - flow.time_derivative(pts, t - h, k)) / (2 * h)
