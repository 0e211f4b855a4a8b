"""Detection and characterization of anomalous (Mpemba) relaxation.

A Mpemba crossing is a sign change of the difference between two
distance-to-equilibrium series: the state that started farther away ends
up closer.  Thermalization maps record, for a grid of initial states, the
first time the chosen metric falls below a cutoff.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .bloch import BlochState, SystemParams, polar_to_cartesian, rhs_cartesian, stability
from .ode import IntegratorConfig, Trajectory, integrate_batch
from .metrics import metric_values

ZERO_TOL = 1e-12
CHUNK_CELLS = 512
WORKERS_ENV = "MPEMBA_WORKERS"


@dataclass(frozen=True, eq=False)
class MetricSeries:
    times: np.ndarray
    values: np.ndarray
    metric: str
    label: str = ""


@dataclass(frozen=True)
class CrossingEvent:
    first: str
    second: str
    time: float
    metric: str


def metric_series(traj: Trajectory, metric: str, label: str = "") -> MetricSeries:
    return MetricSeries(traj.times, metric_values(traj.cartesian, traj.params.m0, metric), metric, label)


def detect_crossings(a: MetricSeries, b: MetricSeries) -> list[CrossingEvent]:
    """Times where a(t) - b(t) changes sign, by linear interpolation.

    Samples with |a - b| <= 1e-12 are treated as touching: a run of them
    between opposite signs counts as one crossing placed at its first
    sample, and a run with the same sign on both sides (or no sign after
    it) is not a crossing.  Crossings inside the first output stride are
    dropped.
    """
    if a.times.shape != b.times.shape or not np.array_equal(a.times, b.times):
        raise ValueError("series must share the same time grid")
    t = a.times
    delta = a.values - b.values
    sign = np.where(np.abs(delta) <= ZERO_TOL, 0, np.sign(delta)).astype(int)
    t_min = t[1] if len(t) > 1 else t[0]
    events = []
    last_idx, last_sign = None, 0
    for i, s in enumerate(sign):
        if s == 0:
            continue
        if last_sign and s != last_sign:
            if i == last_idx + 1:
                d0, d1 = delta[last_idx], delta[i]
                tc = t[last_idx] + (t[i] - t[last_idx]) * d0 / (d0 - d1)
            else:
                tc = t[last_idx + 1]
            if tc >= t_min:
                events.append(CrossingEvent(a.label, b.label, float(tc), a.metric))
        last_idx, last_sign = i, s
    return events


def all_crossings(series: Sequence[MetricSeries]) -> list[CrossingEvent]:
    out = []
    for a, b in combinations(series, 2):
        out.extend(detect_crossings(a, b))
    return sorted(out, key=lambda e: (e.time, e.first, e.second))


def earliest_crossing(series: Sequence[MetricSeries]) -> Optional[float]:
    ev = all_crossings(series)
    return ev[0].time if ev else None


def mpe_timescale(params: SystemParams) -> float:
    return stability(params).mpe_timescale


# --- initial-state generators -------------------------------------------------


def line_states(r_values, slope: float = -5 / 6, intercept: float = 0.5, phi: float = 0.0) -> list[BlochState]:
    """States on the line ``slope * r + theta / pi = intercept``."""
    states = []
    for r in r_values:
        theta = math.pi * (intercept - slope * r)
        states.append(BlochState(float(r), min(max(theta, 0.0), math.pi), phi))
    return states


@dataclass(frozen=True)
class GridSpec:
    n_r: int = 64
    n_theta: int = 64
    r_min: float = 0.05
    r_max: float = 1.0
    theta_min: float = 0.0
    theta_max: float = math.pi

    def __post_init__(self):
        if self.n_r < 1 or self.n_theta < 1:
            raise ValueError("grid needs at least one cell per axis")
        if not (0 < self.r_min <= self.r_max <= 1):
            raise ValueError("grid must cover r in (0, 1]")
        if not (0 <= self.theta_min <= self.theta_max <= math.pi):
            raise ValueError("grid must cover theta in [0, pi]")

    @property
    def r(self) -> np.ndarray:
        return np.linspace(self.r_min, self.r_max, self.n_r)

    @property
    def theta(self) -> np.ndarray:
        return np.linspace(self.theta_min, self.theta_max, self.n_theta)

    def mesh(self):
        """(R, TH) arrays of shape (n_r, n_theta)."""
        return np.meshgrid(self.r, self.theta, indexing="ij")


# --- thermalization maps --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ThermalizationMap:
    r0: np.ndarray
    theta0: np.ndarray
    tau: np.ndarray  # shape (len(r0), len(theta0)); NaN where not reached
    cutoff: float
    metric: str

    def rows(self):
        for i, r in enumerate(self.r0):
            for j, th in enumerate(self.theta0):
                tau = self.tau[i, j]
                yield float(r), float(th), None if np.isnan(tau) else float(tau)


def worker_count() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def first_crossing_batch(initial: np.ndarray, params: SystemParams, config: IntegratorConfig, metric: str, cutoff: float) -> np.ndarray:
    """Streamed first-passage times below ``cutoff``; NaN when never reached."""
    n = len(initial)
    tau = np.full(n, np.nan)
    prev = {"t": 0.0, "v": None}

    def observe(k, t, m):
        v = metric_values(m, params.m0, metric)
        open_ = np.isnan(tau)
        hit = open_ & (v < cutoff)
        if k == 0:
            tau[hit] = 0.0
        elif np.any(hit):
            v0 = prev["v"][hit]
            tau[hit] = prev["t"] + (t - prev["t"]) * (v0 - cutoff) / (v0 - v[hit])
        prev["t"], prev["v"] = t, v
        return not np.any(np.isnan(tau))

    integrate_batch(initial, params, config, observer=observe, store=False)
    return tau


def _chunk_job(args):
    return first_crossing_batch(*args)


def thermalization_map(
    grid: GridSpec,
    params: SystemParams,
    cutoff: float = 1e-4,
    config: Optional[IntegratorConfig] = None,
    metric: str = "S",
    workers: Optional[int] = None,
) -> ThermalizationMap:
    """First time the metric drops below ``cutoff`` for every grid cell.

    Cells are processed in fixed-size chunks, so results do not depend on
    the number of workers.
    """
    if not cutoff > 0:
        raise ValueError("cutoff must be positive")
    if config is None:
        config = IntegratorConfig(t_end=20.0 * max(params.t1, params.t2))
    rr, tt = grid.mesh()
    initial = polar_to_cartesian(rr.ravel(), tt.ravel())
    jobs = [
        (initial[i : i + CHUNK_CELLS], params, config, metric, cutoff)
        for i in range(0, len(initial), CHUNK_CELLS)
    ]
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            parts = list(pool.map(_chunk_job, jobs))
    else:
        parts = [_chunk_job(j) for j in jobs]
    tau = np.concatenate(parts).reshape(rr.shape)
    return ThermalizationMap(grid.r, grid.theta, tau, cutoff, metric)


# --- speed fields ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpeedField:
    r: np.ndarray  # flat arrays over grid points with r > 0
    theta: np.ndarray
    velocity: np.ndarray  # (N, 2): (v_x, v_z) in the phi = 0 plane
    speed: np.ndarray

    @property
    def direction(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            d = self.velocity / self.speed[:, None]
        return np.where(self.speed[:, None] > 0, d, 0.0)


def speed_field(grid: GridSpec, params: SystemParams) -> SpeedField:
    rr, tt = grid.mesh()
    keep = rr.ravel() > 0
    r, th = rr.ravel()[keep], tt.ravel()[keep]
    m = polar_to_cartesian(r, th)
    v = rhs_cartesian(m, params)[:, [0, 2]]
    return SpeedField(r, th, v, np.linalg.norm(v, axis=1))


def trajectories_for(states: Sequence[BlochState], params: SystemParams, config: IntegratorConfig) -> list[Trajectory]:
    """Integrate several initial states together on a shared time grid."""
    initial = np.array([s.to_cartesian() for s in states])
    times, samples = integrate_batch(initial, params, config)
    return [Trajectory(times, samples[:, i, :], params, s.phi) for i, s in enumerate(states)]
