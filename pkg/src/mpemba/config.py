"""Experiment configuration, presets and JSON (de)serialization.

A config file is a JSON document holding either a single experiment object
or ``{"experiments": [...]}``.  Example::

    {
      "name": "demo",
      "experiment": "trajectories",
      "params": {"t1": 1.0, "t2": 1.0, "n": 1000, "m0": 0.5, "shared_env": true},
      "line": {"slope": -0.8333333333333334, "intercept": 0.5,
               "r_min": 0.05, "r_max": 0.6, "count": 12},
      "integrator": {"method": "rk4_fixed", "step": 0.001, "t_end": 2.0},
      "metric": "S",
      "cutoff": 0.0001
    }

``params`` accepts ``tphi`` in place of ``t2``.  Exactly one of ``states``
(list of ``[r, theta, phi]``), ``line`` or ``grid`` selects the initial
states; ``stability`` experiments need none.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from .analysis import GridSpec, line_states
from .bloch import BlochState, DomainError, SystemParams, t2_from_tphi
from .ode import IntegratorConfig
from .metrics import METRICS

EXPERIMENTS = ("trajectories", "crossings", "thermal_map", "speed_field", "stability")


class ConfigError(ValueError):
    """Malformed configuration; the message names the offending field."""


@dataclass(frozen=True)
class LineSpec:
    slope: float = -5 / 6
    intercept: float = 0.5
    r_min: float = 0.05
    r_max: float = 0.6
    count: int = 12
    phi: float = 0.0

    def states(self) -> list[BlochState]:
        return line_states(np.linspace(self.r_min, self.r_max, self.count), self.slope, self.intercept, self.phi)


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    experiment: str
    params: SystemParams
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    states: Optional[tuple] = None
    line: Optional[LineSpec] = None
    grid: Optional[GridSpec] = None
    metric: str = "S"
    cutoff: float = 1e-4

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment: unknown value {self.experiment!r}; expected one of {EXPERIMENTS}")
        if self.metric not in METRICS:
            raise ConfigError(f"metric: unknown value {self.metric!r}; expected one of {METRICS}")
        if not self.cutoff > 0:
            raise ConfigError(f"cutoff: must be positive, got {self.cutoff}")
        given = [k for k in ("states", "line", "grid") if getattr(self, k) is not None]
        if self.experiment != "stability" and len(given) != 1:
            raise ConfigError(f"initial states: exactly one of states/line/grid required, got {given or 'none'}")
        if self.experiment in ("thermal_map", "speed_field") and self.grid is None:
            raise ConfigError(f"grid: required for experiment {self.experiment!r}")
        if self.states is not None and len(self.states) == 0:
            raise ConfigError("states: initial-state list is empty")

    def initial_states(self) -> list[BlochState]:
        if self.states is not None:
            return [BlochState(*s) for s in self.states]
        if self.line is not None:
            return self.line.states()
        rr, tt = self.grid.mesh()
        return [BlochState(float(r), float(t)) for r, t in zip(rr.ravel(), tt.ravel())]


# --- serialization --------------------------------------------------------------


def to_dict(cfg: ExperimentConfig) -> dict:
    out = {
        "name": cfg.name,
        "experiment": cfg.experiment,
        "params": asdict(cfg.params),
        "integrator": asdict(cfg.integrator),
        "metric": cfg.metric,
        "cutoff": cfg.cutoff,
    }
    if cfg.states is not None:
        out["states"] = [list(s) for s in cfg.states]
    if cfg.line is not None:
        out["line"] = asdict(cfg.line)
    if cfg.grid is not None:
        out["grid"] = asdict(cfg.grid)
    return out


def dumps(configs) -> str:
    if isinstance(configs, ExperimentConfig):
        configs = [configs]
    return json.dumps({"experiments": [to_dict(c) for c in configs]}, indent=2, sort_keys=True) + "\n"


def _build(cls, data, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected an object, got {type(data).__name__}")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"{path}.{sorted(unknown)[0]}: unknown field")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def params_from_dict(data, path: str = "params") -> SystemParams:
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected an object")
    data = dict(data)
    if "tphi" in data:
        if "t2" in data:
            raise ConfigError(f"{path}: give either t2 or tphi, not both")
        tphi = data.pop("tphi")
        try:
            data["t2"] = t2_from_tphi(data.get("t1", 1.0), tphi)
        except (TypeError, DomainError) as exc:
            raise ConfigError(f"{path}.tphi: {exc}") from None
    return _build(SystemParams, data, path)


def from_dict(data, path: str = "experiment") -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected an object")
    allowed = {f.name for f in fields(ExperimentConfig)}
    for key in data:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}: unknown field")
    for key in ("name", "experiment", "params"):
        if key not in data:
            raise ConfigError(f"{path}.{key}: missing required field")
    kw = {k: v for k, v in data.items() if k not in ("params", "integrator", "line", "grid", "states")}
    kw["params"] = params_from_dict(data["params"], f"{path}.params")
    if "integrator" in data:
        kw["integrator"] = _build(IntegratorConfig, data["integrator"], f"{path}.integrator")
    if data.get("line") is not None:
        kw["line"] = _build(LineSpec, data["line"], f"{path}.line")
    if data.get("grid") is not None:
        kw["grid"] = _build(GridSpec, data["grid"], f"{path}.grid")
    if data.get("states") is not None:
        states = data["states"]
        if not isinstance(states, list):
            raise ConfigError(f"{path}.states: expected a list of [r, theta, phi]")
        for i, s in enumerate(states):
            if not (isinstance(s, list) and len(s) in (2, 3) and all(isinstance(x, (int, float)) for x in s)):
                raise ConfigError(f"{path}.states[{i}]: expected [r, theta] or [r, theta, phi]")
            try:
                BlochState(*s)
            except DomainError as exc:
                raise ConfigError(f"{path}.states[{i}]: {exc}") from None
        kw["states"] = tuple(tuple(float(x) for x in s) + (0.0,) * (3 - len(s)) for s in states)
    try:
        return ExperimentConfig(**kw)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def loads(text: str) -> list[ExperimentConfig]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if isinstance(doc, dict) and "experiments" in doc:
        items = doc["experiments"]
        if not isinstance(items, list) or not items:
            raise ConfigError("experiments: expected a non-empty list")
        return [from_dict(item, f"experiments[{i}]") for i, item in enumerate(items)]
    return [from_dict(doc)]


# --- presets ---------------------------------------------------------------------


def preset_fig2(n: int = 1000, t_end: float = 2.0) -> list[ExperimentConfig]:
    """Trajectories on the line -(5/6) r + theta/pi = 1/2, shared bath and an independent-bath control."""
    line = LineSpec()
    integ = IntegratorConfig(t_end=t_end)
    return [
        ExperimentConfig("fig2_shared", "trajectories", SystemParams(1.0, 1.0, n, 0.5, True), integ, line=line),
        ExperimentConfig("fig2_independent", "trajectories", SystemParams(1.0, 1.0, n, 0.5, False), integ, line=line),
    ]


def preset_fig3(n: int = 100, grid: GridSpec = GridSpec()) -> list[ExperimentConfig]:
    """Thermalization maps and speed fields, with and without a shared bath."""
    integ = IntegratorConfig(t_end=20.0)
    out = []
    for shared, tag in ((True, "shared"), (False, "independent")):
        p = SystemParams(1.0, 1.0, n, 0.5, shared)
        out.append(ExperimentConfig(f"fig3_map_{tag}", "thermal_map", p, integ, grid=grid, cutoff=1e-4))
        out.append(ExperimentConfig(f"fig3_field_{tag}", "speed_field", p, integ, grid=grid))
    return out


def preset_fig4(t2_ratio: float = 0.01, count: int = 11, t_end: float = 3.0, grid: GridSpec = GridSpec()) -> list[ExperimentConfig]:
    """Anisotropic relaxation without a shared bath: r0 = 0.75, theta0 in [0, pi/3]."""
    p = SystemParams(1.0, t2_ratio, 1, 0.5, False)
    states = tuple((0.75, k * (math.pi / 3) / (count - 1), 0.0) for k in range(count))
    return [
        ExperimentConfig("fig4_trajectories", "trajectories", p, IntegratorConfig(t_end=t_end), states=states),
        ExperimentConfig("fig4_map", "thermal_map", p, IntegratorConfig(t_end=20.0), grid=grid, cutoff=1e-4),
        ExperimentConfig("fig4_field", "speed_field", p, IntegratorConfig(t_end=20.0), grid=grid),
    ]


PRESETS = {"fig2": preset_fig2, "fig3": preset_fig3, "fig4": preset_fig4}
