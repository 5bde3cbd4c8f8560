"""Dense complex linear algebra: Hermitian eigenproblems, propagators, fidelities.

All functions are pure and operate on plain numpy arrays. States are 1-D
complex vectors with unit 2-norm; density matrices are Hermitian, unit-trace,
positive semidefinite up to a small roundoff allowance.
"""
from __future__ import annotations

import numpy as np

from .errors import DimMismatch, NotHermitian

HERMITIAN_ATOL = 1e-12
# Density matrices produced by fixed-step integration may carry eigenvalues
# down to -1e-8; anything more negative is treated as invalid input.
PSD_CLAMP = 1e-8


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product of two matrices; dimensions multiply."""
    return np.kron(a, b)


def kron_all(ops) -> np.ndarray:
    """Tensor product of a sequence of matrices, left factor most significant."""
    out = np.eye(1, dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def is_hermitian(m: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    """True when max|M - M^dag| < atol."""
    return bool(np.max(np.abs(m - m.conj().T)) < atol)


def _require_hermitian(m: np.ndarray, atol: float = HERMITIAN_ATOL) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimMismatch(f"expected a square matrix, got shape {m.shape}")
    dev = np.max(np.abs(m - m.conj().T))
    if dev >= atol:
        raise NotHermitian(f"max|M - M^dag| = {dev:.3e} >= {atol:.0e}")


def herm_eig(h: np.ndarray):
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvector columns). Raises NotHermitian
    when the input fails the Hermiticity check.
    """
    _require_hermitian(h)
    w, v = np.linalg.eigh(h)
    return w, v


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """Unitary propagator exp(-i h t) computed via eigendecomposition."""
    w, v = herm_eig(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def _validate_density(rho: np.ndarray, name: str) -> None:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimMismatch(f"{name} is not square: shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-8:
        raise NotHermitian(f"{name} is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > 1e-8:
        raise ValueError(f"{name} has trace {tr}, expected 1")
    wmin = np.linalg.eigvalsh(rho)[0]
    if wmin < -PSD_CLAMP:
        raise ValueError(f"{name} has eigenvalue {wmin:.3e} below -{PSD_CLAMP:.0e}")


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    w = np.where(w < 0.0, 0.0, w)  # negatives already bounded by the validator
    return (v * np.sqrt(w)) @ v.conj().T


def uhlmann_fidelity(r1: np.ndarray, r2: np.ndarray) -> float:
    """Square-root fidelity Tr sqrt(sqrt(r1) r2 sqrt(r1)), clipped to [0, 1].

    Tiny negative eigenvalues of the inner product (roundoff, magnitude below
    PSD_CLAMP) are clamped to zero before the square root.
    """
    if r1.shape != r2.shape:
        raise DimMismatch(f"shape {r1.shape} vs {r2.shape}")
    _validate_density(r1, "r1")
    _validate_density(r2, "r2")
    s = _psd_sqrt(r1)
    w = np.linalg.eigvalsh(s @ r2 @ s)
    if w[0] < -PSD_CLAMP:
        raise ValueError(f"inner product eigenvalue {w[0]:.3e} below -{PSD_CLAMP:.0e}")
    w = np.where(w < 0.0, 0.0, w)
    return float(min(np.sum(np.sqrt(w)), 1.0))


def bures_distance(r1: np.ndarray, r2: np.ndarray) -> float:
    """Bures distance sqrt(2 - 2 * uhlmann_fidelity), in [0, sqrt(2)]."""
    f = uhlmann_fidelity(r1, r2)
    return float(np.sqrt(max(2.0 - 2.0 * f, 0.0)))
