import itertools

import numpy as np
import pytest

from quenchsense import ising, qmath
from quenchsense.errors import Degenerate, DimMismatch, DimTooLarge


def brute_force_zz_energies(n):
    """Enumerate the classical energies of (1/2) sum_i s_i s_{i+1} with PBC."""
    energies = []
    for bits in itertools.product([1, -1], repeat=n):
        energies.append(0.5 * sum(bits[i] * bits[(i + 1) % n] for i in range(n)))
    return sorted(energies)


def test_two_site_chain_is_pure_bond():
    h = ising.build_chain(ising.ChainParams(n_spins=2, b_x=0.0, b_z=0.0))
    # the two coincident PBC bond terms of J/2 sum to a net J on the pair
    assert np.allclose(h, np.diag([1.0, -1.0, -1.0, 1.0]))


def test_two_site_chain_equals_two_spin_model():
    rng = np.random.default_rng(1)
    for _ in range(10):
        bx, bz = rng.uniform(-2, 2, size=2)
        chain = ising.build_chain(ising.ChainParams(n_spins=2, b_x=bx, b_z=bz))
        assert np.allclose(chain, ising.build_two_spin(bx, bz), atol=1e-14)


def test_three_site_spectrum_matches_enumeration():
    h = ising.build_chain(ising.ChainParams(n_spins=3, b_x=0.0, b_z=0.0))
    w = np.linalg.eigvalsh(h)
    assert np.allclose(w, brute_force_zz_energies(3), atol=1e-12)
    assert np.allclose(sorted(w), [-0.5] * 6 + [1.5] * 2)


def test_chain_hermitian_and_real():
    rng = np.random.default_rng(2)
    for n in (2, 3, 5):
        h = ising.build_chain(ising.ChainParams(n_spins=n, b_x=rng.uniform(0, 1),
                                                b_z=rng.uniform(0, 2)))
        assert qmath.is_hermitian(h)
        assert np.max(np.abs(h.imag)) == 0.0


def test_open_boundary_has_one_less_bond():
    closed = ising.build_chain(ising.ChainParams(n_spins=3, b_x=0.0, b_z=0.0))
    opened = ising.build_chain(ising.ChainParams(n_spins=3, b_x=0.0, b_z=0.0,
                                                 periodic=False))
    s3 = ising.site_operator(ising.SIGMA_Z, 3, 3) @ ising.site_operator(ising.SIGMA_Z, 1, 3)
    assert np.allclose(closed - opened, 0.5 * s3)


def test_chain_rejects_oversized_lattice():
    with pytest.raises(DimTooLarge):
        ising.build_chain(ising.ChainParams(n_spins=15, b_x=0.1, b_z=0.0))


def test_two_spin_diagonal_at_unit_longitudinal_field():
    h = ising.build_two_spin(0.0, 1.0)
    # hand evaluation over {|00>,|01>,|10>,|11>}: 2Bz + 1, -1, -1, 1 - 2Bz
    assert np.allclose(h, np.diag([3.0, -1.0, -1.0, -1.0]))


def test_two_spin_zero_fields():
    assert np.allclose(ising.build_two_spin(0.0, 0.0), np.diag([1, -1, -1, 1]))


def test_two_spin_exchange_symmetry():
    swap = np.eye(4)[[0, 2, 1, 3]]
    rng = np.random.default_rng(3)
    for _ in range(50):
        bx, bz = rng.uniform(-3, 3, size=2)
        h = ising.build_two_spin(bx, bz)
        assert np.max(np.abs(swap @ h - h @ swap)) < 1e-12


def test_effective_model_at_critical_field():
    h = ising.build_effective(0.1, 1.0)
    expected = -np.eye(2) + 0.1 * np.sqrt(2) * ising.SIGMA_X
    assert np.allclose(h, expected)
    w = np.linalg.eigvalsh(h)
    assert abs((w[1] - w[0]) - 2 * np.sqrt(2) * 0.1) < 1e-14


def test_effective_ground_state_angle():
    # eigenvector of the lowest level makes tan(theta) = sqrt(2) Bx / (1 - Bz)
    for bx, bz in [(0.1, 0.8), (0.05, 1.1), (0.2, 0.95)]:
        gs = ising.ground_state(ising.build_effective(bx, bz))
        v = gs.state
        theta = np.arctan2(np.sqrt(2) * bx, 1.0 - bz)
        expected = np.array([-np.sin(theta / 2), np.cos(theta / 2)])
        assert abs(abs(np.vdot(expected, v)) - 1.0) < 1e-12


def test_ground_state_polarized_two_spin():
    gs = ising.ground_state(ising.build_two_spin(0.0, 2.0))
    assert abs(gs.energy - (-3.0)) < 1e-12
    assert abs(abs(gs.state[3]) - 1.0) < 1e-12


def test_ground_state_degenerate_first_order_point():
    with pytest.raises(Degenerate):
        ising.ground_state(ising.build_two_spin(0.0, 1.0))


def test_ground_state_effective_at_critical():
    gs = ising.ground_state(ising.build_effective(0.1, 1.0))
    expected = np.array([-1.0, 1.0]) / np.sqrt(2)  # theta = pi/2
    assert abs(abs(np.vdot(expected, gs.state)) - 1.0) < 1e-12


def test_ground_state_residual():
    rng = np.random.default_rng(5)
    for _ in range(5):
        h = ising.build_chain(ising.ChainParams(n_spins=4, b_x=rng.uniform(0.2, 1),
                                                b_z=rng.uniform(0, 0.5)))
        gs = ising.ground_state(h)
        resid = np.max(np.abs(h @ gs.state - gs.energy * gs.state))
        assert resid < 1e-9 * np.linalg.norm(h)


def test_order_parameter_neel_state():
    for n in (2, 4, 6):
        idx = int("01" * (n // 2), 2)
        psi = np.zeros(2 ** n, dtype=complex)
        psi[idx] = 1.0
        assert abs(ising.order_parameter(psi, n) - 0.25) < 1e-14


def test_order_parameter_polarized_state():
    for n in (2, 4, 6):
        psi = np.zeros(2 ** n, dtype=complex)
        psi[0] = 1.0
        assert ising.order_parameter(psi, n) < 1e-14


def test_order_parameter_bounds_random_states():
    rng = np.random.default_rng(7)
    for n in (2, 3, 4):
        for _ in range(20):
            v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
            v /= np.linalg.norm(v)
            val = ising.order_parameter(v, n)
            assert -1e-12 <= val <= 0.25 + 1e-12


def test_order_parameter_dim_mismatch():
    with pytest.raises(DimMismatch):
        ising.order_parameter(np.ones(8) / np.sqrt(8), 2)


def test_order_parameter_smooth_crossover_transverse_scan():
    # second-order side: no abrupt jump between adjacent grid points
    vals = []
    for bx in np.linspace(0.1, 1.2, 23):
        gs = ising.ground_state(ising.build_chain(
            ising.ChainParams(n_spins=6, b_x=bx, b_z=0.0)))
        vals.append(ising.order_parameter(gs.state, 6))
    diffs = np.abs(np.diff(vals))
    assert vals[0] > 0.2 and vals[-1] < 0.08  # ordered toward polarized
    assert np.max(diffs) < 0.05


def test_two_lowest_symmetric_states_live_in_reduced_subspace():
    # Validates the two-level reduction. The exchange-odd singlet
    # (|01>-|10>)/sqrt(2) sits at energy -1, between the two reduced-model
    # levels near the critical point, but it is decoupled from the |11>
    # dynamics; the reduction concerns the exchange-even sector, whose two
    # lowest states must lie in span{|11>, (|01>+|10>)/sqrt(2)}.
    a = np.array([0, 0, 0, 1.0])
    b = np.array([0, 1.0, 1.0, 0]) / np.sqrt(2)
    proj = np.outer(a, a) + np.outer(b, b)
    swap = np.eye(4)[[0, 2, 1, 3]]
    for bx in (0.02, 0.05, 0.1):
        for bz in np.linspace(0.7, 1.3, 7):
            w, v = np.linalg.eigh(ising.build_two_spin(bx, bz))
            even = [k for k in range(4)
                    if np.real(np.vdot(v[:, k], swap @ v[:, k])) > 0.5]
            for k in even[:2]:
                weight = np.real(np.vdot(v[:, k], proj @ v[:, k]))
                assert weight >= 0.99


def test_matrix_free_ground_state_matches_dense():
    for n, bx, bz in [(6, 0.4, 0.3), (8, 0.7, 0.1), (8, 0.3, 1.1)]:
        p = ising.ChainParams(n_spins=n, b_x=bx, b_z=bz)
        dense = ising.ground_state(ising.build_chain(p))
        fast = ising.ground_state_chain(p)
        assert abs(dense.energy - fast.energy) < 1e-9
        assert abs(abs(np.vdot(dense.state, fast.state)) - 1.0) < 1e-9
        assert abs(dense.degeneracy_gap - fast.degeneracy_gap) < 1e-8
