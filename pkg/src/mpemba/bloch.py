"""Mean-field Bloch dynamics of a relaxing spin-1/2 ensemble.

The state is the average magnetization in polar form (r, theta, phi).
Two dissipative settings are supported:

* shared environment: all spins couple to one bath, which adds the
  collective term ``(n - 1) m0 r / (2 t1)`` to the polar-angle equation;
* independent environments: every spin sees its own (identical) bath and
  the ensemble relaxes like a single spin, with the closed-form solution
  given by :func:`analytic_independent`.

Internally everything is evaluated in Cartesian Bloch coordinates, where
the equations of motion are polynomial and free of the 1/r and 1/sin(theta)
coordinate singularities of the polar form::

    dm_x/dt = -m_x / t2 - k m_z m_x
    dm_y/dt = -m_y / t2 - k m_z m_y
    dm_z/dt = (m0 - m_z) / t1 + k (m_x**2 + m_y**2)

with ``k = (n - 1) m0 / (2 t1)`` for a shared bath and ``k = 0`` otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np


class DomainError(ValueError):
    """An input lies outside the domain where the model is defined."""


class SingularStateError(DomainError):
    """The polar angle is undefined (r = 0 with sin(theta) != 0)."""


@dataclass(frozen=True)
class BlochState:
    """Average magnetization in polar coordinates.

    ``theta`` is kept in [0, pi] and ``phi`` in [0, 2 pi).
    """

    r: float
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.r) and np.isfinite(self.theta) and np.isfinite(self.phi)):
            raise DomainError(f"non-finite Bloch state {self!r}")
        if self.r < 0 or self.r > 1:
            raise DomainError(f"r must lie in [0, 1], got {self.r}")
        if self.theta < 0 or self.theta > math.pi:
            raise DomainError(f"theta must lie in [0, pi], got {self.theta}")
        object.__setattr__(self, "phi", float(self.phi) % (2 * math.pi))

    def to_cartesian(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array(
            [
                self.r * st * math.cos(self.phi),
                self.r * st * math.sin(self.phi),
                self.r * math.cos(self.theta),
            ]
        )

    @classmethod
    def from_cartesian(cls, m, phi_hint: float = 0.0) -> "BlochState":
        """Build a state from a Cartesian Bloch vector.

        On the z axis the azimuth is undefined; ``phi_hint`` is used there.
        """
        r, theta, phi = cartesian_to_polar(np.asarray(m, dtype=float), phi_hint)
        return cls(float(min(r, 1.0)), float(theta), float(phi))


def cartesian_to_polar(m: np.ndarray, phi_hint=0.0):
    """Vectorized Cartesian -> (r, theta, phi) with theta in [0, pi]."""
    m = np.asarray(m, dtype=float)
    perp = np.hypot(m[..., 0], m[..., 1])
    r = np.hypot(perp, m[..., 2])
    theta = np.arctan2(perp, m[..., 2])
    phi = np.where(perp > 0, np.arctan2(m[..., 1], m[..., 0]), phi_hint)
    return r, theta, np.mod(phi, 2 * np.pi)


def polar_to_cartesian(r, theta, phi=0.0) -> np.ndarray:
    r, theta, phi = np.broadcast_arrays(
        np.asarray(r, float), np.asarray(theta, float), np.asarray(phi, float)
    )
    st = np.sin(theta)
    return np.stack([r * st * np.cos(phi), r * st * np.sin(phi), r * np.cos(theta)], axis=-1)


def t2_from_tphi(t1: float, tphi: float) -> float:
    """Decoherence time from relaxation and pure-dephasing times.

    ``1/t2 = 0.5/t1 + 1/tphi``; a very large ``tphi`` gives the
    pure-relaxation limit ``t2 = 2 t1``.
    """
    if not t1 > 0 or not tphi > 0:
        raise DomainError(f"t1 and tphi must be positive, got t1={t1}, tphi={tphi}")
    return 1.0 / (0.5 / t1 + 1.0 / tphi)


@dataclass(frozen=True)
class SystemParams:
    t1: float = 1.0
    t2: float = 1.0
    n: int = 1
    m0: float = 0.5
    shared_env: bool = True

    def __post_init__(self):
        if not (self.t1 > 0 and math.isfinite(self.t1)):
            raise DomainError(f"t1 must be positive, got {self.t1}")
        if not (self.t2 > 0 and math.isfinite(self.t2)):
            raise DomainError(f"t2 must be positive, got {self.t2}")
        # tiny slack so that t2 = 2 t1 computed through t2_from_tphi is accepted
        if self.t2 > 2 * self.t1 * (1 + 1e-12):
            raise DomainError(f"t2 must not exceed 2*t1 (got t1={self.t1}, t2={self.t2})")
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if not abs(self.m0) < 1:
            raise DomainError(f"|m0| must be < 1, got {self.m0}")

    @classmethod
    def from_tphi(cls, t1: float, tphi: float, **kw) -> "SystemParams":
        return cls(t1=t1, t2=t2_from_tphi(t1, tphi), **kw)

    @property
    def tphi(self) -> float:
        """Pure-dephasing time; ``inf`` when t2 == 2 t1."""
        rate = 1.0 / self.t2 - 0.5 / self.t1
        return math.inf if rate <= 0 else 1.0 / rate

    @property
    def collective_rate(self) -> float:
        """Coefficient k of the shared-bath term (zero for independent baths)."""
        if not self.shared_env:
            return 0.0
        return (self.n - 1) * self.m0 / (2.0 * self.t1)

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)


def equilibrium(params: SystemParams, phi: float = 0.0) -> BlochState:
    return BlochState(abs(params.m0), 0.0 if params.m0 >= 0 else math.pi, phi)


def rhs_cartesian(m: np.ndarray, params: SystemParams) -> np.ndarray:
    """Time derivative of Cartesian Bloch vectors; ``m`` has shape (..., 3)."""
    k = params.collective_rate
    mx, my, mz = m[..., 0], m[..., 1], m[..., 2]
    g2 = 1.0 / params.t2 + k * mz
    out = np.empty_like(m)
    out[..., 0] = -g2 * mx
    out[..., 1] = -g2 * my
    out[..., 2] = (params.m0 - mz) / params.t1 + k * (mx * mx + my * my)
    return out


def rhs(state: BlochState, params: SystemParams) -> tuple[float, float, float]:
    """Polar equations of motion (dr/dt, dtheta/dt, dphi/dt)."""
    r, th = state.r, state.theta
    t1, t2, m0 = params.t1, params.t2, params.m0
    s, c = math.sin(th), math.cos(th)
    if r == 0:
        if s != 0:
            raise SingularStateError("theta is undefined at r = 0 unless theta is 0 or pi")
        return (m0 / t1, 0.0, 0.0)
    dr = m0 * c / t1 - r * (c * c / t1 + s * s / t2)
    bracket = c * (1.0 / t2 - 1.0 / t1) + m0 / (r * t1)
    if params.shared_env:
        bracket += (params.n - 1) / (2.0 * t1) * m0 * r
    dtheta = -s * bracket
    return (dr, dtheta, 0.0)


def polar_rates_from_cartesian(m: np.ndarray, dm: np.ndarray) -> tuple[float, float]:
    """Chain rule: (dr/dt, dtheta/dt) from a Cartesian point and velocity."""
    perp = math.hypot(m[0], m[1])
    r = math.hypot(perp, m[2])
    dperp = (m[0] * dm[0] + m[1] * dm[1]) / perp if perp > 0 else math.hypot(dm[0], dm[1])
    dr = (perp * dperp + m[2] * dm[2]) / r
    dtheta = (m[2] * dperp - perp * dm[2]) / (r * r)
    return dr, dtheta


def analytic_independent(initial: BlochState, params: SystemParams, t: float) -> BlochState:
    """Closed-form relaxation under independent baths (any n)."""
    if t < 0:
        raise DomainError(f"t must be non-negative, got {t}")
    if t == 0:
        return initial
    m = analytic_independent_cartesian(initial.to_cartesian(), params, t)
    r, theta, _ = cartesian_to_polar(m)
    return BlochState(float(min(r, 1.0)), float(theta), initial.phi)


def analytic_independent_cartesian(m: np.ndarray, params: SystemParams, t) -> np.ndarray:
    """Vectorized closed form; ``t`` broadcasts against the leading axes of ``m``."""
    m = np.asarray(m, dtype=float)
    t = np.asarray(t, dtype=float)
    e1 = np.exp(-t / params.t1)
    e2 = np.exp(-t / params.t2)
    mx, my, mz = m[..., 0], m[..., 1], m[..., 2]
    return np.stack(
        np.broadcast_arrays(mx * e2, my * e2, params.m0 * (1 - e1) + mz * e1), axis=-1
    )


@dataclass(frozen=True)
class StabilityReport:
    fixed_point: BlochState
    lambda_r: float
    lambda_theta: float

    @property
    def mpe_timescale(self) -> float:
        return min(1.0 / abs(self.lambda_r), 1.0 / abs(self.lambda_theta))


def stability(params: SystemParams) -> StabilityReport:
    """Linearization of the dynamics at the fixed point (m0, 0).

    The Jacobian is diagonal in (r, theta) there, giving
    ``lambda_r = -1/t1`` and ``lambda_theta = -(1/t2 + k m0)``.
    """
    lam_theta = -(1.0 / params.t2 + params.collective_rate * params.m0)
    return StabilityReport(equilibrium(params), -1.0 / params.t1, lam_theta)


def jacobian_fd(params: SystemParams, at=None, eps: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of the Cartesian RHS (default: at equilibrium)."""
    x0 = np.array([0.0, 0.0, params.m0]) if at is None else np.asarray(at, dtype=float)
    jac = np.empty((3, 3))
    for j in range(3):
        dx = np.zeros(3)
        dx[j] = eps
        jac[:, j] = (rhs_cartesian(x0 + dx, params) - rhs_cartesian(x0 - dx, params)) / (2 * eps)
    return jac
