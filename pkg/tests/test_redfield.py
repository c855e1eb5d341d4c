"""Bloch-Redfield tensor: secular filtering, flat-spectrum Lindblad limit."""

import numpy as np
import pytest

from sqsim.core import Operator, basis_ket, qubit_space, sigma_x, sigma_z
from sqsim.errors import ConfigError
from sqsim.lindblad import LindbladModel, solve_lindblad
from sqsim.noise import NoiseSpectrum
from sqsim.redfield import CouplingSpec, br_tensor, solve_br


def qubit_h(omega=5.0):
    return Operator(0.5 * omega * sigma_z().matrix, qubit_space())


def flat_sx_tensor(s0=0.1, omega=5.0):
    spec = CouplingSpec(couplings=((sigma_x(), NoiseSpectrum.flat(s0)),))
    return br_tensor(qubit_h(omega), spec)


def test_tensor_annihilates_trace():
    t = flat_sx_tensor()
    # d rho_ab = sum_cd R_abcd rho_cd must be traceless for every rho
    tr_part = np.einsum("aacd->cd", t.tensor)
    assert np.abs(tr_part).max() < 1e-12


def test_tensor_preserves_hermiticity():
    rng = np.random.default_rng(29)
    t = flat_sx_tensor()
    m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    m = m + m.conj().T
    out = np.einsum("abcd,cd->ab", t.tensor, m)
    assert np.abs(out - out.conj().T).max() < 1e-9


def test_flat_spectrum_matches_lindblad():
    # white sigma_x noise drives both decay and excitation at rate S0
    s0, omega = 0.1, 5.0
    t = flat_sx_tensor(s0, omega)
    rho0 = basis_ket(qubit_space(), 1).dm()
    times = np.linspace(0.0, 10.0, 101)
    br = solve_br(t, rho0, times)

    from sqsim.core import sigma_minus, sigma_plus
    model = LindbladModel(
        hamiltonian=qubit_h(omega),
        channels=((sigma_minus(), s0), (sigma_plus(), s0)),
    )
    ref = solve_lindblad(model, rho0, times, method="expm")
    worst = max(np.abs(a.matrix - b.matrix).max()
                for a, b in zip(br.states, ref.states))
    assert worst < 1e-6


def test_secular_filter_flag():
    secular = flat_sx_tensor(0.05, 5.0)
    assert not secular.nonsecular
    full = br_tensor(qubit_h(5.0),
                     CouplingSpec(couplings=((sigma_x(), NoiseSpectrum.flat(0.05)),)),
                     secular_cutoff=float("inf"))
    assert full.nonsecular


def test_thermal_spectrum_steady_state():
    # asymmetric spectrum: S(omega_q) != S(-omega_q) sets the excited
    # population ratio to S(-w)/S(w) (detailed balance)
    omega = 5.0
    up, down = 0.02, 0.1

    def s(w):
        w = np.asarray(w, dtype=float)
        return np.where(w > 0, down, np.where(w < 0, up, 0.5 * (up + down)))

    spec = CouplingSpec(couplings=((sigma_x(), NoiseSpectrum.custom(s)),))
    t = br_tensor(qubit_h(omega), spec)
    rho0 = basis_ket(qubit_space(), 1).dm()
    times = np.linspace(0.0, 200.0, 51)
    res = solve_br(t, rho0, times)
    pe = res.states[-1].matrix[1, 1].real
    assert pe == pytest.approx(up / (up + down), abs=1e-4)


def test_solver_reports_diagnostics():
    t = flat_sx_tensor()
    rho0 = basis_ket(qubit_space(), 1).dm()
    res = solve_br(t, rho0, np.linspace(0.0, 1.0, 5))
    assert "min_eigenvalue" in res.diagnostics
    assert res.diagnostics["min_eigenvalue"] > -1e-9


def test_rejects_non_hermitian_coupling():
    bad = Operator(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex),
                   qubit_space())
    with pytest.raises(ConfigError):
        CouplingSpec(couplings=((bad, NoiseSpectrum.flat(1.0)),))


def test_rejects_cross_spectra():
    with pytest.raises(ConfigError):
        CouplingSpec(couplings=((sigma_x(), NoiseSpectrum.flat(1.0)),),
                     cross_spectra=object())
