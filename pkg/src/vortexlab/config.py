"""Scenario configuration: TOML or JSON with dotted sections.

Sections: ``scenario`` (Gamma, nu list, z0, t0, T, t_anchor, init),
``flow`` (kind and its parameters), ``grid`` (N, optional L), ``solver``
(cfl, dealias, window_fraction), ``outputs`` (times in units of T0 or
absolute, format, directory) and optional per-subcommand sections
``approx``, ``relax``, ``spectrum`` and ``burgers``.  Every key is checked
before any run starts; errors name the dotted key.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import tomli

from .errors import ConfigError, UnknownKind
from .flows import ExternalFlow, make_flow

FLOW_PARAMETERS = {
    "zero": (),
    "linear_strain": ("gamma",),
    "rotating_strain": ("gamma", "omega_r"),
    "cellular": ("U", "Lc"),
}

DEFAULTS = {
    "scenario": {"Gamma": 1.0, "z0": [0.0, 0.0], "t_anchor": None, "init": "approx"},
    "grid": {"N": 256, "L": None},
    "solver": {"cfl": 0.4, "dealias": True, "window_fraction": 0.4},
    "outputs": {"format": "binary", "directory": "runs", "time_unit": "T0", "snapshots": True},
    "approx": {"n_theta": 128},
    "relax": {"mode": "linear", "tau_max": 6.0, "dtau": 2e-3, "samples": 64, "t_end": None},
    "spectrum": {"modes": [0, 1, 2], "count": 3},
    "burgers": {"delta": [0.04, 0.02, 0.01], "lam": 0.5},
}


def _number(value, key, positive=False, allow_zero=True) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number")
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError(f"{key} must be finite")
    if positive and not (v > 0 or (allow_zero and v == 0)):
        raise ConfigError(f"{key} must be positive")
    return v


def _numbers(value, key, positive=False) -> list[float]:
    seq = value if isinstance(value, list) else [value]
    if not seq:
        raise ConfigError(f"{key} must not be empty")
    return [_number(v, f"{key}[{i}]", positive, allow_zero=False) for i, v in enumerate(seq)]


def _require(section: dict, name: str, key: str):
    if key not in section:
        raise ConfigError(f"missing required key {name}.{key}")
    return section[key]


@dataclass
class ScenarioConfig:
    """Validated configuration; ``raw`` is the fully resolved mapping."""

    Gamma: float
    nu: list
    z0: tuple
    t0: float
    T: float
    t_anchor: float | None
    init: str
    flow_kind: str
    flow_params: dict
    N: int
    L: float | None
    cfl: float
    dealias: bool
    window_fraction: float
    output_times: list
    time_unit: str
    format: str
    directory: str
    snapshots: bool
    sections: dict = field(default_factory=dict)

    def flow(self) -> ExternalFlow:
        return make_flow(self.flow_kind, **self.flow_params)

    def times(self) -> list[float]:
        """Output times in physical units."""
        if self.time_unit == "T0":
            T0 = self.flow().T0
            if not math.isfinite(T0):
                raise ConfigError("outputs.time_unit = 'T0' needs a flow with finite T0")
            return [v * T0 for v in self.output_times]
        return list(self.output_times)

    def resolved(self) -> dict:
        out = asdict(self)
        out["z0"] = list(self.z0)
        return out


def parse_config(data: dict) -> ScenarioConfig:
    """Validate a nested mapping and fill defaults."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping of sections")
    sec = {}
    for name, defaults in DEFAULTS.items():
        given = data.get(name, {})
        if not isinstance(given, dict):
            raise ConfigError(f"{name} must be a section")
        sec[name] = {**defaults, **given}
    for name in ("flow",):
        if not isinstance(data.get(name, {}), dict):
            raise ConfigError(f"{name} must be a section")
    unknown = set(data) - set(DEFAULTS) - {"flow"}
    if unknown:
        raise ConfigError(f"unknown section {sorted(unknown)[0]}")

    sc = sec["scenario"]
    Gamma = _number(sc["Gamma"], "scenario.Gamma", positive=True, allow_zero=False)
    nu = _numbers(_require(sc, "scenario", "nu"), "scenario.nu", positive=True)
    for i, v in enumerate(nu):
        if not v / Gamma < 1:
            raise ConfigError(f"scenario.nu[{i}] gives delta = nu/Gamma >= 1")
    z0 = sc["z0"]
    if not isinstance(z0, list) or len(z0) != 2:
        raise ConfigError("scenario.z0 must be a pair of numbers")
    z0 = tuple(_number(v, f"scenario.z0[{i}]") for i, v in enumerate(z0))
    t0 = _number(_require(sc, "scenario", "t0"), "scenario.t0", positive=True, allow_zero=False)
    T = _number(_require(sc, "scenario", "T"), "scenario.T", positive=True, allow_zero=False)
    if T < t0:
        raise ConfigError("scenario.T must not precede scenario.t0")
    t_anchor = None if sc["t_anchor"] is None else _number(sc["t_anchor"], "scenario.t_anchor", True)
    if sc["init"] not in ("approx", "gaussian"):
        raise ConfigError("scenario.init must be 'approx' or 'gaussian'")

    fl = data.get("flow", {})
    kind = _require(fl, "flow", "kind")
    if kind not in FLOW_PARAMETERS:
        raise ConfigError(f"flow.kind {kind!r} is not one of {sorted(FLOW_PARAMETERS)}")
    params = {}
    for key in FLOW_PARAMETERS[kind]:
        if key == "omega_r":
            params[key] = _number(fl.get(key, 0.0), f"flow.{key}")
        else:
            params[key] = _number(_require(fl, "flow", key), f"flow.{key}", True, allow_zero=False)
    extra = set(fl) - {"kind"} - set(FLOW_PARAMETERS[kind])
    if extra:
        raise ConfigError(f"flow.{sorted(extra)[0]} is not a parameter of {kind}")
    try:
        make_flow(kind, **params)
    except (ValueError, UnknownKind) as exc:
        raise ConfigError(f"flow: {exc}") from exc

    gr = sec["grid"]
    N = gr["N"]
    if isinstance(N, bool) or not isinstance(N, int) or N < 8 or N & (N - 1):
        raise ConfigError("grid.N must be a power of two (at least 8)")
    L = None if gr["L"] is None else _number(gr["L"], "grid.L", True, allow_zero=False)

    so = sec["solver"]
    cfl = _number(so["cfl"], "solver.cfl")
    if not 0 < cfl < 1:
        raise ConfigError("solver.cfl must lie in (0, 1)")
    if not isinstance(so["dealias"], bool):
        raise ConfigError("solver.dealias must be true or false")
    frac = _number(so["window_fraction"], "solver.window_fraction")
    if not 0 < frac < 0.5:
        raise ConfigError("solver.window_fraction must lie in (0, 0.5)")

    out = sec["outputs"]
    times = sorted(_numbers(_require(out, "outputs", "times"), "outputs.times", positive=True))
    if out["time_unit"] not in ("T0", "absolute"):
        raise ConfigError("outputs.time_unit must be 'T0' or 'absolute'")
    if out["format"] not in ("binary", "csv"):
        raise ConfigError("outputs.format must be 'binary' or 'csv'")
    if not isinstance(out["directory"], str) or not out["directory"]:
        raise ConfigError("outputs.directory must be a path")
    if not isinstance(out["snapshots"], bool):
        raise ConfigError("outputs.snapshots must be true or false")

    _check_sections(sec)
    extras = {k: sec[k] for k in ("approx", "relax", "spectrum", "burgers")}
    return ScenarioConfig(Gamma, nu, z0, t0, T, t_anchor, sc["init"], kind, params, N, L, cfl,
                          so["dealias"], frac, times, out["time_unit"], out["format"],
                          out["directory"], out["snapshots"], extras)


def _check_sections(sec: dict) -> None:
    ap = sec["approx"]
    n_theta = ap["n_theta"]
    if isinstance(n_theta, bool) or not isinstance(n_theta, int) or n_theta < 16:
        raise ConfigError("approx.n_theta must be an integer >= 16")
    rl = sec["relax"]
    if rl["mode"] not in ("linear", "nonlinear"):
        raise ConfigError("relax.mode must be 'linear' or 'nonlinear'")
    _number(rl["tau_max"], "relax.tau_max", True, allow_zero=False)
    _number(rl["dtau"], "relax.dtau", True, allow_zero=False)
    if isinstance(rl["samples"], bool) or not isinstance(rl["samples"], int) or rl["samples"] < 20:
        raise ConfigError("relax.samples must be an integer >= 20")
    if rl["t_end"] is not None:
        _number(rl["t_end"], "relax.t_end", True, allow_zero=False)
    sp = sec["spectrum"]
    if not isinstance(sp["modes"], list) or not all(
            isinstance(n, int) and not isinstance(n, bool) and n >= 0 for n in sp["modes"]):
        raise ConfigError("spectrum.modes must be a list of nonnegative integers")
    if isinstance(sp["count"], bool) or not isinstance(sp["count"], int) or sp["count"] < 1:
        raise ConfigError("spectrum.count must be a positive integer")
    bu = sec["burgers"]
    for i, d in enumerate(_numbers(bu["delta"], "burgers.delta", positive=True)):
        if d > 0.05:
            raise ConfigError(f"burgers.delta[{i}] exceeds 0.05")
    lam = _number(bu["lam"], "burgers.lam")
    if not 0 <= lam < 1:
        raise ConfigError("burgers.lam must lie in [0, 1)")


def load_config(path) -> ScenarioConfig:
    """Read a ``.toml`` or ``.json`` file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    try:
        if path.suffix == ".json":
            data = json.loads(text)
        else:
            data = tomli.loads(text)
    except (ValueError, tomli.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return parse_config(data)
