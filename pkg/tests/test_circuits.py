"""Circuit Hamiltonians, spectra, and the dispersive reduction."""

import numpy as np
import pytest

from sqsim.circuits import (
    CircuitParams,
    cpb_hamiltonian,
    cpb_spectrum,
    fluxonium_hamiltonian,
    fluxonium_spectrum,
    jc_hamiltonian,
    qubit_parameters,
    schrieffer_wolff,
    spectrum,
)
from sqsim.errors import ConfigError


def test_cpb_matrix_structure():
    params = CircuitParams(e_j=10.0, e_c=1.0)
    ncut = 6
    h = cpb_hamiltonian(params, ncut)
    m = h.matrix
    assert m.shape == (2 * ncut + 1, 2 * ncut + 1)
    # charge basis: kinetic term on the diagonal, -E_J/2 on the off-diagonals
    charges = np.arange(-ncut, ncut + 1)
    assert np.allclose(np.diag(m), 4.0 * params.e_c * charges**2)
    assert np.allclose(np.diag(m, 1), -0.5 * params.e_j)
    assert h.is_hermitian()


def test_cpb_spectrum_matches_dense_diagonalization():
    params = CircuitParams(e_j=20.0, e_c=0.25, n_ext=0.3)
    h = cpb_hamiltonian(params, 35)
    ref = np.sort(np.linalg.eigvalsh(h.matrix))
    spec = cpb_spectrum(params, 35, nlevels=5)
    assert np.allclose(spec.energies, ref[:5], atol=1e-10)


def test_transmon_asymptotic_frequency():
    # deep transmon: E01 ~ sqrt(8 EJ EC) - EC, anharmonicity ~ -EC
    params = CircuitParams(e_j=50.0, e_c=1.0)
    qubit = qubit_parameters(cpb_spectrum(params, 60, nlevels=3))
    plasma = np.sqrt(8.0 * params.e_j * params.e_c)
    assert qubit.omega_q == pytest.approx(plasma - params.e_c, rel=0.02)
    # alpha = -E_C only to leading order; the sqrt(E_C/E_J) correction is ~15%
    assert qubit.anharmonicity == pytest.approx(-params.e_c, rel=0.2)


def test_cpb_charge_periodicity():
    params = CircuitParams(e_j=1.0, e_c=1.0, n_ext=0.17)
    shifted = CircuitParams(e_j=1.0, e_c=1.0, n_ext=1.17)
    a = cpb_spectrum(params, 25, nlevels=4).energies
    b = cpb_spectrum(shifted, 25, nlevels=4).energies
    assert np.abs(a - b).max() < 1e-8


def test_fluxonium_harmonic_limit():
    # with E_J = 0 the circuit is an LC oscillator at sqrt(8 E_L E_C);
    # the grid discretization is second order, so leave room for O(h^2)
    params = CircuitParams(e_j=0.0, e_c=1.3, e_l=0.7)
    spec = fluxonium_spectrum(params, -20.0, 20.0, 4001, nlevels=4)
    gaps = np.diff(spec.energies)
    omega = np.sqrt(8.0 * params.e_l * params.e_c)
    assert np.allclose(gaps, omega, rtol=1e-4)


def test_fluxonium_grid_second_order_convergence():
    params = CircuitParams(e_j=8.9, e_c=2.5, e_l=0.5, phi_ext=np.pi)
    e01 = []
    for pts in (2001, 4001, 8001):
        e = fluxonium_spectrum(params, -6 * np.pi, 6 * np.pi, pts).energies
        e01.append(e[1] - e[0])
    # grid doubling should shrink the error by ~4x
    ratio = (e01[1] - e01[0]) / (e01[2] - e01[1])
    assert 3.0 < ratio < 5.0


def test_fluxonium_flux_sweet_spot_symmetry():
    # spectrum is symmetric about phi_ext = pi
    base = dict(e_j=4.0, e_c=1.0, e_l=0.8)
    up = fluxonium_spectrum(CircuitParams(phi_ext=np.pi + 0.3, **base),
                            -15.0, 15.0, 2001).energies
    dn = fluxonium_spectrum(CircuitParams(phi_ext=np.pi - 0.3, **base),
                            -15.0, 15.0, 2001).energies
    assert np.allclose(up, dn, atol=1e-8)


def test_jc_hamiltonian_dressed_energies():
    omega_c, omega_q, g, nmax = 5.0, 5.3, 0.12, 6
    h = jc_hamiltonian(omega_c, omega_q, g, nmax)
    energies = np.sort(np.linalg.eigvalsh(h.matrix))
    # absolute energies include the cavity zero point and -omega_q/2 for
    # the qubit ground state; the one-excitation doublet is centered on
    # omega_c above that with the vacuum Rabi splitting
    delta = omega_q - omega_c
    ground = 0.5 * (omega_c - omega_q)
    split = np.sqrt(delta**2 + 4.0 * g**2)
    assert energies[0] == pytest.approx(ground, abs=1e-12)
    expect = ground + omega_c + 0.5 * (omega_q - omega_c) \
        + np.array([-0.5 * split, 0.5 * split])
    assert np.allclose(energies[1:3], expect, atol=1e-10)


def test_spectrum_sorting_and_nlevels():
    rng = np.random.default_rng(23)
    m = rng.normal(size=(6, 6))
    m = 0.5 * (m + m.T)
    from sqsim.core import HilbertSpace, Operator
    spec = spectrum(Operator(m, HilbertSpace((6,))), nlevels=4)
    assert len(spec.energies) == 4
    assert np.all(np.diff(spec.energies) >= 0)


def test_schrieffer_wolff_two_level_chi():
    delta = 1.0
    g = 0.05
    omega_q = 6.0
    omega_r = omega_q - delta
    levels = np.array([0.0, omega_q])
    gmat = np.array([[0.0, g], [0.0, 0.0]], dtype=complex)
    model = schrieffer_wolff(levels, gmat, omega_r)
    # two-level chi_10 is exactly g^2/Delta
    assert model.chi == pytest.approx(g**2 / delta, rel=1e-12)


def test_schrieffer_wolff_against_exact_jc():
    omega_c, omega_q, g = 5.0, 6.0, 0.05
    delta = omega_q - omega_c
    levels = np.array([0.0, omega_q])
    gmat = np.array([[0.0, g], [0.0, 0.0]], dtype=complex)
    model = schrieffer_wolff(levels, gmat, omega_c)

    h = jc_hamiltonian(omega_c, omega_q, g, 8)
    energies = np.sort(np.linalg.eigvalsh(h.matrix))
    # dressed qubit frequency from the one-excitation doublet
    e_g0, (e_lo, e_hi) = energies[0], energies[1:3]
    exact_omega_q = e_hi - e_g0
    budget = 2.0 * g**4 / delta**3
    assert abs(model.omega_q_dressed - exact_omega_q) < budget


def test_schrieffer_wolff_rejects_small_detuning():
    levels = np.array([0.0, 5.0])
    gmat = np.array([[0.0, 0.3], [0.0, 0.0]], dtype=complex)
    with pytest.raises(ConfigError):
        schrieffer_wolff(levels, gmat, 5.1)


def test_circuit_params_validation():
    with pytest.raises(ConfigError):
        CircuitParams(e_j=1.0, e_c=0.0)
    with pytest.raises(ConfigError):
        CircuitParams(e_j=-1.0, e_c=1.0)
    with pytest.raises(ConfigError):
        cpb_hamiltonian(CircuitParams(e_j=1.0, e_c=1.0), 0)
