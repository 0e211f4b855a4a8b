"""Exact Lindblad evolution of a few spins, used as ground truth.

Basis per spin is (up, down) with sigma_z = diag(1, -1), so the raising
operator ``sigma_plus = [[0, 1], [0, 0]]`` pushes toward m_z = +1.  With the
jump operators

    L1 = sqrt((1 + m0) / (2 t1)) sigma_plus
    L2 = sqrt((1 - m0) / (2 t1)) sigma_minus
    L3 = sqrt(1 / (2 tphi)) sigma_z

a single spin relaxes to the Bloch vector (0, 0, m0).

Vectorization is column stacking: ``vec(A rho B) = (B.T kron A) vec(rho)``,
i.e. ``vec(rho) = rho.reshape(-1, order="F")``.

For a shared bath the double particle sum collapses onto collective
operators ``J_k = sum_i L_k(i)`` and the generator is ``sum_k D[J_k]``; for
independent baths it is ``sum_{i,k} D[L_k(i)]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.sparse.linalg import expm_multiply

from .bloch import DomainError, SystemParams

MAX_SPINS = 3

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Y = np.array([[0.0, -1j], [1j, 0.0]])
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]])
SIGMA_MINUS = SIGMA_PLUS.T.copy()


class ResourceError(RuntimeError):
    """Requested system is too large for the dense oracle."""


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    d = math.isqrt(v.shape[-1])
    return np.asarray(v).reshape(v.shape[:-1] + (d, d), order="F")


def embed(op: np.ndarray, site: int, n: int) -> np.ndarray:
    """Single-spin operator acting on ``site`` of an n-spin register."""
    factors = [np.eye(2)] * n
    factors[site] = op
    return reduce(np.kron, factors)


def jump_operators(params: SystemParams) -> list[list[np.ndarray]]:
    """Jump operators grouped per channel: ``ops[k][i]`` is L_k on spin i."""
    rates = [
        (1 + params.m0) / (2 * params.t1),
        (1 - params.m0) / (2 * params.t1),
        0.0 if math.isinf(params.tphi) else 1 / (2 * params.tphi),
    ]
    singles = [SIGMA_PLUS, SIGMA_MINUS, SIGMA_Z]
    return [
        [math.sqrt(rate) * embed(op, i, params.n) for i in range(params.n)]
        for rate, op in zip(rates, singles)
    ]


def dissipator(jumps: list[np.ndarray], dim: int) -> np.ndarray:
    """Superoperator of sum_J (J rho J^dag - 1/2 {J^dag J, rho})."""
    eye = np.eye(dim)
    out = np.zeros((dim * dim, dim * dim), dtype=np.result_type(*jumps))
    gram = np.zeros((dim, dim), dtype=out.dtype)
    for j in jumps:
        out += np.kron(j.conj(), j)
        gram += j.conj().T @ j
    out -= 0.5 * (np.kron(eye, gram) + np.kron(gram.T, eye))
    return out


@dataclass(frozen=True, eq=False)
class Liouvillian:
    matrix: np.ndarray
    n: int
    shared: bool

    @property
    def dim(self) -> int:
        return 2**self.n


def build_liouvillian(params: SystemParams, mode: str | None = None) -> Liouvillian:
    """Dense generator acting on column-stacked density matrices.

    ``mode`` is ``"shared"`` or ``"independent"``; by default it follows
    ``params.shared_env``.
    """
    if mode is None:
        mode = "shared" if params.shared_env else "independent"
    if mode not in ("shared", "independent"):
        raise ValueError(f"unknown mode {mode!r}")
    if params.n > MAX_SPINS:
        raise ResourceError(f"exact oracle is capped at n <= {MAX_SPINS}, got n={params.n}")
    ops = jump_operators(params)
    if mode == "shared":
        jumps = [sum(channel) for channel in ops]
    else:
        jumps = [op for channel in ops for op in channel]
    dim = 2**params.n
    return Liouvillian(dissipator(jumps, dim), params.n, mode == "shared")


def check_density_matrix(rho: np.ndarray, tol: float = 1e-9) -> None:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DomainError(f"density matrix must be square, got shape {rho.shape}")
    if abs(np.trace(rho) - 1) > tol:
        raise DomainError(f"trace is {np.trace(rho)}, expected 1")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise DomainError("density matrix is not Hermitian")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -tol:
        raise DomainError("density matrix is not positive semidefinite")


def evolve_exact(rho0: np.ndarray, liouvillian: Liouvillian, times) -> np.ndarray:
    """Propagate ``rho0`` to each of ``times``; returns shape (len(times), d, d).

    Uses the truncated-Taylor action of the matrix exponential between
    consecutive times, so only matrix-vector products with the generator
    are needed.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    check_density_matrix(rho0)
    if rho0.shape[0] != liouvillian.dim:
        raise DomainError(f"rho0 has dimension {rho0.shape[0]}, generator expects {liouvillian.dim}")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0 or times[0] < 0 or np.any(np.diff(times) < 0):
        raise DomainError("times must be a non-empty ascending array starting at t >= 0")
    out = np.empty((len(times),) + rho0.shape, dtype=complex)
    v = vec(rho0)
    t_prev = 0.0
    for i, t in enumerate(times):
        if t > t_prev:
            v = expm_multiply(liouvillian.matrix * (t - t_prev), v)
        out[i] = unvec(v)
        t_prev = t
    return out


def product_state(bloch_vector, n: int) -> np.ndarray:
    """n identical single-spin states with Cartesian Bloch vector ``bloch_vector``."""
    mx, my, mz = bloch_vector
    single = 0.5 * (np.eye(2) + mx * SIGMA_X + my * SIGMA_Y + mz * SIGMA_Z)
    return reduce(np.kron, [single] * n)


def mean_magnetization(rho: np.ndarray) -> np.ndarray:
    """Cartesian Bloch vector averaged over spins, (1/n) sum_i tr(rho sigma_k(i))."""
    rho = np.asarray(rho)
    n = int(round(math.log2(rho.shape[-1])))
    out = np.zeros(rho.shape[:-2] + (3,))
    for k, sigma in enumerate((SIGMA_X, SIGMA_Y, SIGMA_Z)):
        for i in range(n):
            op = embed(sigma, i, n)
            out[..., k] += np.einsum("...ij,ji->...", rho, op).real
    return out / n


def stationary_state(liouvillian: Liouvillian) -> np.ndarray:
    """Normalized null vector of the generator (unique for independent baths)."""
    w, v = np.linalg.eig(liouvillian.matrix)
    idx = int(np.argmin(np.abs(w)))
    rho = unvec(v[:, idx])
    rho = rho / np.trace(rho)
    return 0.5 * (rho + rho.conj().T)
