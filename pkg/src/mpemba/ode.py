"""Explicit Runge-Kutta integration of the Bloch equations.

Integration runs on batches of Cartesian Bloch vectors of shape (N, 3), so
a whole grid of initial states advances together.  Output is sampled on a
uniform grid ``k * output_stride``; between samples the fixed-step scheme
takes an integer number of equal sub-steps and the adaptive scheme chooses
its own steps and lands exactly on every sample time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .bloch import BlochState, SystemParams, cartesian_to_polar, rhs_cartesian, stability

CLAMP_SLACK = 1e-9


class IntegrationError(RuntimeError):
    def __init__(self, message: str, last_time: float):
        super().__init__(f"{message} (last good time {last_time:.17g})")
        self.last_time = last_time


def default_output_stride(params: SystemParams) -> float:
    """Resolve the fastest relaxation mode with 50 samples."""
    rep = stability(params)
    return min(params.t2, 1.0 / abs(rep.lambda_theta)) / 50.0


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk4_fixed"
    step: float = 1e-3
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    t_end: float = 5.0
    output_stride: Optional[float] = None  # None -> default_output_stride(params)

    def __post_init__(self):
        if self.method not in ("rk4_fixed", "rkf45_adaptive"):
            raise ValueError(f"unknown integration method {self.method!r}")
        for name in ("step", "rel_tol", "abs_tol", "t_end"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.output_stride is not None and not self.output_stride > 0:
            raise ValueError(f"output_stride must be positive, got {self.output_stride}")

    def stride_for(self, params: SystemParams) -> float:
        return self.output_stride if self.output_stride is not None else default_output_stride(params)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples of one relaxation path; ``cartesian`` has shape (len(times), 3)."""

    times: np.ndarray
    cartesian: np.ndarray
    params: SystemParams
    phi0: float = 0.0

    @property
    def polar(self):
        return cartesian_to_polar(self.cartesian, self.phi0)

    @property
    def r(self) -> np.ndarray:
        return self.polar[0]

    @property
    def theta(self) -> np.ndarray:
        return self.polar[1]

    @property
    def states(self) -> list[BlochState]:
        r, th, ph = self.polar
        return [BlochState(float(a), float(b), float(c)) for a, b, c in zip(np.minimum(r, 1.0), th, ph)]

    @property
    def final(self) -> BlochState:
        return self.states[-1]


def _clamp(m: np.ndarray, t: float) -> np.ndarray:
    r = np.linalg.norm(m, axis=-1)
    bad = r > 1 + CLAMP_SLACK
    if np.any(bad):
        raise IntegrationError(f"|m| reached {r.max():.17g} > 1; step size too large", t)
    over = r > 1
    if np.any(over):
        m = m.copy()
        m[over] /= r[over, None]
    return m


def _rk4_step(f, m, h):
    k1 = f(m)
    k2 = f(m + 0.5 * h * k1)
    k3 = f(m + 0.5 * h * k2)
    k4 = f(m + h * k3)
    return m + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


# Runge-Kutta-Fehlberg 4(5) tableau
_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
)
_B4 = (25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0)
_B5 = (16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55)


def _rkf45_step(f, m, h):
    ks = []
    for a in _A:
        y = m
        for aj, kj in zip(a, ks):
            y = y + h * aj * kj
        ks.append(f(y))
    y4 = m + h * sum(b * k for b, k in zip(_B4, ks) if b)
    y5 = m + h * sum(b * k for b, k in zip(_B5, ks) if b)
    # local extrapolation: advance with the fifth-order solution
    return y5, y5 - y4


Observer = Callable[[int, float, np.ndarray], bool]


def integrate_batch(
    initial: np.ndarray,
    params: SystemParams,
    config: IntegratorConfig,
    observer: Optional[Observer] = None,
    store: bool = True,
):
    """Integrate a batch of Cartesian initial vectors.

    ``observer(k, t, m)`` is called at every output sample (including t=0);
    returning True stops the integration early.  Returns ``(times, samples)``
    where samples has shape (len(times), N, 3), or ``(times, None)`` when
    ``store`` is False.
    """
    m = _clamp(np.array(initial, dtype=float, ndmin=2), 0.0)
    stride = config.stride_for(params)
    n_out = int(math.floor(config.t_end / stride * (1 + 1e-12))) + 1
    f = lambda y: rhs_cartesian(y, params)  # noqa: E731

    times = [0.0]
    samples = [m.copy()] if store else None
    if observer is not None and observer(0, 0.0, m):
        return np.array(times), (np.array(samples) if store else None)

    n_sub = max(1, math.ceil(stride / config.step - 1e-9))
    h_fixed = stride / n_sub
    h = min(config.step, stride)
    for k in range(1, n_out):
        t0, t1 = (k - 1) * stride, k * stride
        if config.method == "rk4_fixed":
            for _ in range(n_sub):
                m = _rk4_step(f, m, h_fixed)
            m = _clamp(m, t1)
        else:
            m, h = _adaptive_segment(f, m, t0, t1, h, config)
        times.append(t1)
        if store:
            samples.append(m.copy())
        if observer is not None and observer(k, t1, m):
            break
    return np.array(times), (np.array(samples) if store else None)


def _adaptive_segment(f, m, t0, t1, h, config):
    t = t0
    h_min = 1e-14 * max(1.0, abs(t1))
    while t < t1:
        h_try = min(h, t1 - t)
        y, err = _rkf45_step(f, m, h_try)
        scale = config.abs_tol + config.rel_tol * np.maximum(np.abs(m), np.abs(y))
        err_norm = float(np.max(np.abs(err) / scale)) if err.size else 0.0
        if err_norm <= 1.0:
            t = t1 if h_try == t1 - t else t + h_try
            m = _clamp(y, t)
            growth = 5.0 if err_norm == 0 else min(5.0, 0.9 * err_norm**-0.2)
            # keep the proposed step when it was only truncated to hit t1
            h = max(h, h_try * growth) if h_try < h else h_try * growth
        else:
            h = h_try * max(0.1, 0.9 * err_norm**-0.25)
        if h < h_min:
            raise IntegrationError("adaptive step size underflow", t)
    return m, h


def integrate(initial: BlochState, params: SystemParams, config: IntegratorConfig) -> Trajectory:
    times, samples = integrate_batch(initial.to_cartesian()[None, :], params, config)
    return Trajectory(times, samples[:, 0, :], params, initial.phi)


def first_crossing_time(times, values, cutoff: float) -> Optional[float]:
    """First time the linearly interpolated series drops below ``cutoff``."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    below = np.flatnonzero(values < cutoff)
    if len(below) == 0:
        return None
    i = int(below[0])
    if i == 0:
        return float(times[0])
    v0, v1 = values[i - 1], values[i]
    return float(times[i - 1] + (times[i] - times[i - 1]) * (v0 - cutoff) / (v0 - v1))
