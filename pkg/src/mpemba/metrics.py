"""Distance measures between a qubit state and equilibrium.

All logarithms are natural (entropies in nats).
"""

from __future__ import annotations

import math

import numpy as np

from .bloch import BlochState, DomainError, SystemParams
from .lindblad import SIGMA_X, SIGMA_Y, SIGMA_Z

EIG_FLOOR = 1e-12


def density_from_bloch(state: BlochState) -> np.ndarray:
    """rho = (I + m . sigma) / 2."""
    if state.r > 1:
        raise DomainError(f"r must be <= 1, got {state.r}")
    return density_from_vector(state.to_cartesian())


def density_from_vector(m) -> np.ndarray:
    mx, my, mz = m
    if mx * mx + my * my + mz * mz > 1 + 1e-12:
        raise DomainError("Bloch vector lies outside the unit ball")
    return 0.5 * (np.eye(2) + mx * SIGMA_X + my * SIGMA_Y + mz * SIGMA_Z)


def equilibrium_density(params: SystemParams) -> np.ndarray:
    return density_from_vector((0.0, 0.0, params.m0))


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    return np.array([np.trace(rho @ s).real for s in (SIGMA_X, SIGMA_Y, SIGMA_Z)])


def euclidean_distance(state: BlochState, params: SystemParams) -> tuple[float, float, float]:
    """(D, D_z, D_perp) of the magnetization from (0, 0, m0)."""
    mz = state.r * math.cos(state.theta)
    d_z = abs(mz - params.m0)
    d_perp = state.r * math.sin(state.theta)
    return math.hypot(d_z, d_perp), d_z, d_perp


def _xlogx(p: np.ndarray) -> np.ndarray:
    p = np.where((p < 0) & (p >= -EIG_FLOOR), 0.0, p)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)


def relative_entropy(rho: np.ndarray, sigma: np.ndarray) -> float:
    """S(rho || sigma) = tr(rho ln rho) - tr(rho ln sigma) via eigendecompositions."""
    p = np.linalg.eigvalsh(rho)
    q, v = np.linalg.eigh(sigma)
    if q.min() <= 0:
        raise DomainError("sigma is singular; relative entropy is infinite")
    log_sigma = (v * np.log(q)) @ v.conj().T
    s = float(np.sum(_xlogx(p)) - np.trace(rho @ log_sigma).real)
    return max(s, 0.0)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(rho - sigma))))


# --- batched forms over Cartesian Bloch vectors, shape (..., 3) -------------


def distances(m: np.ndarray, m0: float):
    """Batched (D, D_z, D_perp) against the equilibrium vector (0, 0, m0)."""
    d_z = np.abs(m[..., 2] - m0)
    d_perp = np.hypot(m[..., 0], m[..., 1])
    return np.hypot(d_z, d_perp), d_z, d_perp


def relative_entropy_to_equilibrium(m: np.ndarray, m0: float) -> np.ndarray:
    """Batched S(rho(m) || rho_ss) using the qubit closed form.

    Both states share the z-diagonal basis of rho_ss, so
    ``tr(rho ln rho_ss) = (1 + m_z)/2 ln((1 + m0)/2) + (1 - m_z)/2 ln((1 - m0)/2)``.
    """
    if not abs(m0) < 1:
        raise DomainError("equilibrium state is singular")
    r = np.minimum(np.linalg.norm(m, axis=-1), 1.0)
    neg_entropy = _xlogx(0.5 * (1 + r)) + _xlogx(0.5 * (1 - r))
    cross = 0.5 * (1 + m[..., 2]) * math.log(0.5 * (1 + m0)) + 0.5 * (1 - m[..., 2]) * math.log(0.5 * (1 - m0))
    return np.maximum(neg_entropy - cross, 0.0)


METRICS = ("D", "Dz", "Dperp", "S")


def metric_values(m: np.ndarray, m0: float, metric: str) -> np.ndarray:
    if metric == "S":
        return relative_entropy_to_equilibrium(m, m0)
    d, d_z, d_perp = distances(m, m0)
    try:
        return {"D": d, "Dz": d_z, "Dperp": d_perp}[metric]
    except KeyError:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}") from None
