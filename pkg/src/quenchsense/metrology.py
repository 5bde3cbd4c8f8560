"""Fisher-information engines: pure/mixed state information, SLD, measurements.

The distance-based estimators take a state family as a callable so the same
code drives closed-form families, exact-diagonalization families, and open
system pipelines.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qmath
from .errors import DimMismatch, NotHermitian

POVM_COMPLETENESS_ATOL = 1e-10
POVM_PSD_ATOL = 1e-10
PROB_CLAMP = 1e-12
SPECTRAL_EIG_FLOOR = 1e-10


@dataclass(frozen=True)
class Povm:
    """A positive-operator-valued measure; elements must resolve the identity."""

    elements: tuple = field(default_factory=tuple)

    def __post_init__(self):
        elems = tuple(np.asarray(e, dtype=complex) for e in self.elements)
        object.__setattr__(self, "elements", elems)
        dim = elems[0].shape[0]
        total = np.zeros((dim, dim), dtype=complex)
        for e in elems:
            if e.shape != (dim, dim):
                raise DimMismatch("POVM elements must share one square shape")
            if np.linalg.eigvalsh(0.5 * (e + e.conj().T))[0] < -POVM_PSD_ATOL:
                raise ValueError("POVM element is not positive semidefinite")
            total += e
        if np.max(np.abs(total - np.eye(dim))) >= POVM_COMPLETENESS_ATOL:
            raise ValueError("POVM elements do not sum to the identity")

    def __len__(self):
        return len(self.elements)


def pure_qfi(state: np.ndarray, dstate: np.ndarray) -> float:
    """4(<d|d> - |<s|d>|^2) for a normalized state and its parameter derivative."""
    if state.shape != dstate.shape:
        raise DimMismatch(f"state {state.shape} vs derivative {dstate.shape}")
    val = 4.0 * (np.vdot(dstate, dstate).real - abs(np.vdot(state, dstate)) ** 2)
    return float(max(val, 0.0))


def pure_qfi_fd(state_at, b_z: float, delta: float) -> float:
    """Distance-based estimate 4 D_B^2[rho(b-d/2), rho(b+d/2)] / d^2 for pure families.

    For projectors of pure states the Bures distance reduces exactly to
    sqrt(2 - 2|<psi_-|psi_+>|), so the overlap is used directly; no density
    matrices are materialized. Smaller delta converges to pure_qfi.
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    lo = np.asarray(state_at(b_z - 0.5 * delta))
    hi = np.asarray(state_at(b_z + 0.5 * delta))
    if lo.shape != hi.shape:
        raise DimMismatch("state family returned inconsistent dimensions")
    d2 = 2.0 - 2.0 * abs(np.vdot(lo, hi))
    return float(4.0 * max(d2, 0.0) / delta ** 2)


def mixed_qfi_bures_fd(rho_at, b_z: float, delta: float) -> float:
    """Distance-based estimate on a density-matrix family (open-system pipeline)."""
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    lo = np.asarray(rho_at(b_z - 0.5 * delta))
    hi = np.asarray(rho_at(b_z + 0.5 * delta))
    db = qmath.bures_distance(lo, hi)
    return float(4.0 * db ** 2 / delta ** 2)


def mixed_qfi_spectral(rho: np.ndarray, drho: np.ndarray) -> float:
    """Spectral form 2 sum_{ij} |<i|drho|j>|^2 / (l_i + l_j) over l_i + l_j > 1e-10.

    Cross-check for the distance-based estimator; exact in the limit of an
    exact derivative.
    """
    if rho.shape != drho.shape:
        raise DimMismatch(f"rho {rho.shape} vs drho {drho.shape}")
    if np.max(np.abs(drho - drho.conj().T)) > 1e-10:
        raise NotHermitian("drho must be Hermitian")
    w, v = np.linalg.eigh(rho)
    d = v.conj().T @ drho @ v
    s = w[:, None] + w[None, :]
    mask = s > SPECTRAL_EIG_FLOOR
    return float(2.0 * np.sum(np.abs(d[mask]) ** 2 / s[mask]))


def sld(state: np.ndarray, dstate: np.ndarray) -> np.ndarray:
    """Symmetric logarithmic derivative of a pure family: 2(|d><s| + |s><d|)."""
    if state.shape != dstate.shape:
        raise DimMismatch(f"state {state.shape} vs derivative {dstate.shape}")
    return 2.0 * (np.outer(dstate, state.conj()) + np.outer(state, dstate.conj()))


def _fix_phase(v: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(v) > 1e-12)
    ph = v[idx] / abs(v[idx])
    return v / ph


def sld_eigenbasis(state: np.ndarray, dstate: np.ndarray):
    """Eigenvalues and phase-fixed eigenvectors of the SLD.

    Phase convention: first nonzero component real positive, so columns can be
    compared literally against reference measurement vectors.
    """
    w, v = np.linalg.eigh(sld(state, dstate))
    cols = [_fix_phase(v[:, i]) for i in range(v.shape[1])]
    return w, np.stack(cols, axis=1)


def optimal_measurement_vectors() -> np.ndarray:
    """Columns are the four optimal measurement directions at the critical point.

    In the ordered basis {|00>, |01>, |10>, |11>}:
    v1 = (|a>+|b>)/sqrt2, v2 = (|b>-|a>)/sqrt2 up to sign,
    v3, v4 the analogous combinations of |00> and (|01>-|10>)/sqrt2.
    """
    r2 = np.sqrt(2.0)
    return np.array([[0.0, 0.0, r2, -r2],
                     [1.0, 1.0, 1.0, 1.0],
                     [1.0, 1.0, -1.0, -1.0],
                     [r2, -r2, 0.0, 0.0]], dtype=complex) / 2.0


def optimal_povm_at_critical() -> Povm:
    """Four rank-1 projectors onto the critical-point optimal directions."""
    v = optimal_measurement_vectors()
    return Povm(tuple(np.outer(v[:, m], v[:, m].conj()) for m in range(4)))


def born_probs(rho: np.ndarray, povm: Povm) -> np.ndarray:
    """Outcome distribution p_m = Tr(rho Pi_m), clamped at -1e-12 and renormalized."""
    dim = rho.shape[0]
    if povm.elements[0].shape[0] != dim:
        raise DimMismatch(f"rho dim {dim} vs POVM dim {povm.elements[0].shape[0]}")
    p = np.array([np.trace(rho @ e).real for e in povm.elements])
    if np.min(p) < -PROB_CLAMP:
        raise ValueError(f"probability {np.min(p):.3e} below the clamp floor")
    p = np.where(p < 0.0, 0.0, p)
    return p / p.sum()


def cfi(probs_plus: np.ndarray, probs_minus: np.ndarray, delta: float) -> float:
    """Finite-difference classical Fisher information.

    dp_m = (p+_m - p-_m)/delta against the midpoint probability; outcomes with
    midpoint below 1e-12 are skipped.
    """
    p_plus = np.asarray(probs_plus, dtype=float)
    p_minus = np.asarray(probs_minus, dtype=float)
    if p_plus.shape != p_minus.shape:
        raise DimMismatch("probability vectors differ in length")
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    mid = 0.5 * (p_plus + p_minus)
    keep = mid >= PROB_CLAMP
    dp = (p_plus[keep] - p_minus[keep]) / delta
    return float(np.sum(dp ** 2 / mid[keep]))
