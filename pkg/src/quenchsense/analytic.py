"""Closed-form sensitivity results for the perturbed Ising sensor.

Covers the free-fermion ground-state information of the transverse-field
chain, the two-level reduction near the first-order point, the quench
information and state, the fixed-duration outcome probability, and the
critical-region solvers. Dimensionless parameters: h_x = sqrt(2) Bx,
h_z = 1 - Bz, Omega = sqrt(h_x^2 + h_z^2), zeta = h_z / h_x.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BxZero, NoExtremum, NoRoot

CRITICAL_BZ = 1.0


def critical_gap(b_x: float) -> float:
    """Two-level gap at the critical point: 2 sqrt(2) Bx."""
    return 2.0 * np.sqrt(2.0) * b_x


def protocol_duration(b_x: float) -> float:
    """Quench duration tau = pi / (2 sqrt(2) Bx) maximizing the information."""
    if b_x == 0.0:
        raise BxZero("duration diverges at Bx = 0")
    return np.pi / critical_gap(b_x)


@dataclass(frozen=True)
class QuenchParams:
    """Quench fields and duration, with the derived dimensionless combinations."""

    b_x: float
    b_z: float
    t: float

    @property
    def h_x(self) -> float:
        return np.sqrt(2.0) * self.b_x

    @property
    def h_z(self) -> float:
        return 1.0 - self.b_z

    @property
    def omega(self) -> float:
        return float(np.hypot(self.h_x, self.h_z))

    @property
    def zeta(self) -> float:
        if self.b_x == 0.0:
            raise BxZero("zeta undefined at Bx = 0")
        return self.h_z / self.h_x


@dataclass(frozen=True)
class CriticalRegion:
    zeta0: float
    width_L: float
    contrast_C: float


def jw_qfi(b_x: float, n_spins: int, sector: str = "antiperiodic") -> float:
    """Ground-state information of the transverse-field chain (Bz = 0) w.r.t. Bx.

    Free-fermion momentum sum 2 * sum_q (sin q / (1 + 4Bx^2 - 4Bx cos q))^2.
    The shipped sector is antiperiodic, q = (2k+1) pi / N, which is the one
    that matches exact diagonalization; the even-multiple grid is kept behind
    the flag for comparison. The overall factor 2 is likewise pinned by the
    exact-diagonalization match.
    """
    if b_x == 0.0:
        raise BxZero("momentum sum degenerates at Bx = 0")
    if n_spins % 2 != 0:
        raise ValueError("even chain length required")
    k = np.arange(n_spins)
    if sector == "antiperiodic":
        q = (2 * k + 1) * np.pi / n_spins
    elif sector == "periodic":
        q = 2 * k * np.pi / n_spins
    else:
        raise ValueError(f"unknown sector {sector!r}")
    eps2 = 1.0 + 4.0 * b_x ** 2 - 4.0 * b_x * np.cos(q)
    sin_q = np.sin(q)
    keep = np.abs(sin_q) > 1e-15  # removable 0/0 at q = 0, pi on the even grid
    return float(2.0 * np.sum((sin_q[keep] / eps2[keep]) ** 2))


def effective_ground_qfi(b_x: float, b_z: float) -> float:
    """Ground-state information of the two-level reduction: 2Bx^2 / ((1-Bz)^2 + 2Bx^2)^2."""
    if b_x == 0.0:
        raise BxZero("ground state carries no Bz information at Bx = 0")
    return 2.0 * b_x ** 2 / ((1.0 - b_z) ** 2 + 2.0 * b_x ** 2) ** 2


def quench_qfi(q: QuenchParams) -> float:
    """Information of the quenched state exp(-i H_eff t)|a> with respect to Bz.

    Closed form in (h_x, h_z, Omega, t); the cross term enters with a minus
    sign, the choice validated against the full two-spin simulation (see the
    non-negativity and oracle tests). At h_z = 0 this reduces to
    (4 / h_x^2) sin^4(h_x t).
    """
    if q.b_x == 0.0:
        raise BxZero("quench information requires Bx != 0")
    hx, hz, om, t = q.h_x, q.h_z, q.omega, q.t
    s, c = np.sin(om * t), np.cos(om * t)
    return float(
        4.0 * hx ** 2 * hz ** 2 * t ** 2 / om ** 4
        - 8.0 * hx ** 2 * hz ** 2 * t * s * c / om ** 5
        + 4.0 * hx ** 4 * s ** 4 / om ** 6
        + 4.0 * hx ** 2 * hz ** 2 * s ** 2 / om ** 6
    )


def quench_state(q: QuenchParams) -> np.ndarray:
    """Quenched state in the {|a>, |b>} basis (global phase dropped)."""
    if q.b_x == 0.0:
        raise BxZero("quench state reduction requires Bx != 0")
    hx, hz, om, t = q.h_x, q.h_z, q.omega, q.t
    s = np.sin(om * t)
    return np.array([np.cos(om * t) - 1j * (hz / om) * s,
                     -1j * (hx / om) * s])


def dominant_qfi(q: QuenchParams) -> float:
    """Leading term near the critical point: 4 h_x^4 sin^4(Omega t) / Omega^6."""
    if q.b_x == 0.0:
        raise BxZero("requires Bx != 0")
    hx, om, t = q.h_x, q.omega, q.t
    return float(4.0 * hx ** 4 * np.sin(om * t) ** 4 / om ** 6)


def heisenberg_qfi(total_time: float) -> float:
    """Critical-point information as a function of encoding duration: (16/pi^2) T^2."""
    return 16.0 * total_time ** 2 / np.pi ** 2


def _p1_of_zeta(zeta):
    w = np.sqrt(1.0 + zeta ** 2)
    return 0.5 + zeta / (1.0 + zeta ** 2) * np.sin(0.5 * np.pi * w) ** 2


def _dp1_dzeta(zeta):
    w = np.sqrt(1.0 + zeta ** 2)
    u = 0.5 * np.pi * w
    return ((1.0 - zeta ** 2) / (1.0 + zeta ** 2) ** 2 * np.sin(u) ** 2
            + np.pi * zeta ** 2 * np.sin(u) * np.cos(u) / (1.0 + zeta ** 2) ** 1.5)


def optimal_probability(b_x: float, b_z: float) -> float:
    """First-outcome probability of the fixed optimal measurement at tau = pi/gap.

    p(1|Bz) = 1/2 + zeta/(1+zeta^2) sin^2((pi/2) sqrt(1+zeta^2)); two-level
    reduction, so deviations from the full model are O(Bx).
    """
    zeta = QuenchParams(b_x, b_z, 0.0).zeta
    return float(_p1_of_zeta(zeta))


def quench_qfi_ratio(zeta) -> np.ndarray:
    """F(zeta) / F(0) at fixed duration tau = pi/(2 h_x), as a function of zeta only.

    Obtained by substituting t = tau into the quench information and dividing
    by its critical-point value 4/h_x^2; every h_x cancels. The middle-term
    coefficient follows the validated minus-sign form, not the misprinted one.
    """
    z = np.asarray(zeta, dtype=float)
    w = np.sqrt(1.0 + z ** 2)
    half = 0.5 * np.pi * w
    val = (np.pi ** 2 * z ** 2 / w ** 4
           - 2.0 * np.pi * z ** 2 * np.sin(np.pi * w) / w ** 5
           + (4.0 * np.sin(half) ** 4 + 4.0 * z ** 2 * np.sin(half) ** 2) / w ** 6)
    return val / 4.0


def _bisect(fn, lo: float, hi: float, xtol: float) -> float:
    flo = fn(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = fn(mid)
        if fmid == 0.0 or hi - lo < xtol:
            return mid
        if (flo > 0) != (fmid > 0):
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


def critical_region_width(b_x: float, contrast_C: float,
                          scan_step: float = 0.01, scan_max: float = 20.0) -> CriticalRegion:
    """Half-width zeta0 of {zeta : F(zeta) >= C F(0)} and the field-space width.

    Root of the dimensionless ratio equation, found by a uniform scan plus
    bisection to |dzeta| < 1e-10; zeta0 carries no b_x dependence, only the
    width L = 2 h_x zeta0 does.
    """
    if b_x == 0.0:
        raise BxZero("width collapses at Bx = 0")
    if not 0.0 < contrast_C < 1.0:
        raise ValueError(f"contrast must lie in (0, 1), got {contrast_C}")

    def fn(z):
        return float(quench_qfi_ratio(z) - contrast_C)

    grid = np.arange(0.0, scan_max + scan_step, scan_step)
    vals = quench_qfi_ratio(grid) - contrast_C
    sign_change = np.nonzero((vals[:-1] > 0) & (vals[1:] <= 0))[0]
    if sign_change.size == 0:
        raise NoRoot(f"no sign change in zeta in (0, {scan_max}] for C={contrast_C}")
    i = int(sign_change[0])
    zeta0 = _bisect(fn, float(grid[i]), float(grid[i + 1]), 1e-10)
    h_x = np.sqrt(2.0) * b_x
    return CriticalRegion(zeta0=zeta0, width_L=2.0 * h_x * zeta0, contrast_C=contrast_C)


def probability_extrema(scan_max: float = 10.0, scan_step: float = 1e-3):
    """Extrema of p(1|.) nearest zeta = 0: (zeta_min < 0, zeta_max > 0)."""
    grid = np.arange(-scan_max, scan_max + scan_step, scan_step)
    d = _dp1_dzeta(grid)
    flips = np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)[0]
    roots = [_bisect(lambda z: float(_dp1_dzeta(z)), float(grid[i]), float(grid[i + 1]), 1e-12)
             for i in flips]
    neg = [r for r in roots if r < 0]
    pos = [r for r in roots if r > 0]
    if not neg or not pos:
        raise NoExtremum("fewer than two derivative sign changes in the scan window")
    return max(neg), min(pos)


def max_distinguishable_range(b_x: float) -> float:
    """Length of the one-to-one signal window: V_max = h_x |zeta_min - zeta_max|."""
    if b_x == 0.0:
        raise BxZero("range collapses at Bx = 0")
    zeta_min, zeta_max = probability_extrema()
    return float(np.sqrt(2.0) * b_x * abs(zeta_min - zeta_max))
