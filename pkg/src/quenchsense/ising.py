"""Antiferromagnetic Ising chain builders, ground states, and the order parameter.

Basis convention: computational basis |q1 q2 ... qN> with qubit 1 as the most
significant bit and sigma_z|0> = +|0>. Energies are in units of the coupling J.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from . import qmath
from .errors import Degenerate, DimMismatch, DimTooLarge

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

MAX_SPINS = 14
DEGENERACY_TOL = 1e-9
# above this dimension a full eigh is wasteful; Lanczos gets the two lowest states
_DENSE_EIG_LIMIT = 1024


@dataclass(frozen=True)
class ChainParams:
    """Chain size and fields; J=1 is the energy unit throughout."""

    n_spins: int
    b_x: float
    b_z: float
    coupling: float = 1.0
    periodic: bool = True

    def __post_init__(self):
        if self.n_spins < 2:
            raise ValueError(f"need at least 2 spins, got {self.n_spins}")


@dataclass(frozen=True)
class GroundState:
    energy: float
    state: np.ndarray
    degeneracy_gap: float


def site_operator(op: np.ndarray, site: int, n_spins: int) -> np.ndarray:
    """Embed a single-qubit operator at `site` (1-based, MSB first)."""
    return qmath.kron_all(op if i == site else IDENTITY_2 for i in range(1, n_spins + 1))


def _z_values(n: int) -> np.ndarray:
    """sigma_z eigenvalues per site for every basis state; shape (n, 2^n)."""
    k = np.arange(2 ** n)
    return np.stack([1 - 2 * ((k >> (n - i)) & 1) for i in range(1, n + 1)])


def _chain_diagonal(p: ChainParams) -> np.ndarray:
    s = _z_values(p.n_spins)
    n = p.n_spins
    bonds = range(n) if p.periodic else range(n - 1)
    diag = np.zeros(2 ** n)
    for i in bonds:
        diag += 0.5 * p.coupling * s[i] * s[(i + 1) % n]
    diag += p.b_z * s.sum(axis=0)
    return diag


def build_chain(p: ChainParams) -> np.ndarray:
    """Dense chain Hamiltonian (J/2) sum_i sz_i sz_{i+1} + sum_i (Bz sz_i + Bx sx_i).

    Periodic boundary identifies site N+1 with site 1; for N=2 this sums the
    two coincident bond terms to a net coupling J on the single pair. The
    matrix is assembled without kron temporaries so N=14 stays within one
    allocation of the output.
    """
    if p.n_spins > MAX_SPINS:
        raise DimTooLarge(f"N={p.n_spins} exceeds the supported maximum {MAX_SPINS}")
    n = p.n_spins
    dim = 2 ** n
    h = np.zeros((dim, dim), dtype=complex)
    k = np.arange(dim)
    h[k, k] = _chain_diagonal(p)
    for i in range(1, n + 1):
        h[k, k ^ (1 << (n - i))] += p.b_x
    return h


def build_two_spin(b_x: float, b_z: float) -> np.ndarray:
    """Two-spin model Bz(sz1+sz2) + Bx(sx1+sx2) + sz1 sz2."""
    sz1, sz2 = site_operator(SIGMA_Z, 1, 2), site_operator(SIGMA_Z, 2, 2)
    sx1, sx2 = site_operator(SIGMA_X, 1, 2), site_operator(SIGMA_X, 2, 2)
    return b_z * (sz1 + sz2) + b_x * (sx1 + sx2) + sz1 @ sz2


def build_effective(b_x: float, b_z: float) -> np.ndarray:
    """Two-level reduction of the two-spin model near the first-order point.

    Basis ordering {|a> = |11>, |b> = (|01>+|10>)/sqrt(2)}:
    H_eff = -|Bz| 1 + (1-|Bz|) sigma_z + sqrt(2) Bx sigma_x. Intended for
    Bx << 1.
    """
    return (-abs(b_z) * np.eye(2, dtype=complex)
            + (1.0 - abs(b_z)) * SIGMA_Z
            + np.sqrt(2.0) * b_x * SIGMA_X)


def _two_lowest(h: np.ndarray):
    dim = h.shape[0]
    if dim <= _DENSE_EIG_LIMIT:
        w, v = qmath.herm_eig(h)
        return w[0], w[1], v[:, 0]
    v0 = np.ones(dim) / np.sqrt(dim)  # fixed start vector keeps Lanczos deterministic
    w, v = spla.eigsh(h, k=2, which="SA", v0=v0)
    order = np.argsort(w)
    return w[order[0]], w[order[1]], v[:, order[0]]


def ground_state(h: np.ndarray) -> GroundState:
    """Lowest eigenpair with the gap to the next level.

    Raises Degenerate when E1 - E0 < 1e-9 (e.g. the unperturbed first-order
    point; add a small transverse field to lift it).
    """
    e0, e1, vec = _two_lowest(h)
    gap = float(e1 - e0)
    if gap < DEGENERACY_TOL:
        raise Degenerate(f"E1 - E0 = {gap:.3e} < {DEGENERACY_TOL:.0e}")
    return GroundState(energy=float(e0), state=vec.astype(complex), degeneracy_gap=gap)


def ground_state_chain(p: ChainParams) -> GroundState:
    """Ground state of the chain without materializing the dense Hamiltonian.

    Equivalent to ground_state(build_chain(p)); for dimensions above 4096 the
    Hamiltonian is applied matrix-free (diagonal plus single-bit flips), which
    keeps N=13..14 scans within desk-scale memory and runtime.
    """
    if p.n_spins > MAX_SPINS:
        raise DimTooLarge(f"N={p.n_spins} exceeds the supported maximum {MAX_SPINS}")
    n = p.n_spins
    dim = 2 ** n
    if dim <= 4096:
        return ground_state(build_chain(p))
    diag = _chain_diagonal(p)
    masks = [1 << (n - i) for i in range(1, n + 1)]
    k = np.arange(dim)
    flips = [k ^ m for m in masks]

    def matvec(v):
        out = diag * v
        for f in flips:
            out = out + p.b_x * v[f]
        return out

    op = spla.LinearOperator((dim, dim), matvec=matvec, dtype=float)
    v0 = np.ones(dim) / np.sqrt(dim)
    w, v = spla.eigsh(op, k=2, which="SA", v0=v0)
    order = np.argsort(w)
    gap = float(w[order[1]] - w[order[0]])
    if gap < DEGENERACY_TOL:
        raise Degenerate(f"E1 - E0 = {gap:.3e} < {DEGENERACY_TOL:.0e}")
    return GroundState(energy=float(w[order[0]]),
                       state=v[:, order[0]].astype(complex),
                       degeneracy_gap=gap)


def staggered_moment_diagonal(n_spins: int) -> np.ndarray:
    """Diagonal of (1/N) sum_i (-1)^i sz_i / 2 in the computational basis."""
    s = _z_values(n_spins)
    signs = np.array([(-1) ** i for i in range(1, n_spins + 1)])
    return (signs[:, None] * s).sum(axis=0) / (2.0 * n_spins)


def order_parameter(state: np.ndarray, n_spins: int) -> float:
    """Squared staggered magnetization <M^2> of a pure state; in [0, 1/4]."""
    if state.shape[0] != 2 ** n_spins:
        raise DimMismatch(f"state dim {state.shape[0]} != 2^{n_spins}")
    m = staggered_moment_diagonal(n_spins)
    return float(np.sum(np.abs(state) ** 2 * m ** 2))
