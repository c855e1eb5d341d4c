"""Floquet modes, reconstruction, and weak-coupling rates under driving."""

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from sqsim.core import Operator, basis_ket, qubit_space, sigma_x, sigma_z
from sqsim.errors import ConfigError
from sqsim.floquet import (
    filter_function,
    floquet_couplings,
    floquet_modes,
    floquet_rates,
    propagator_at,
    reconstruct,
    solve_floquet_markov,
)
from sqsim.noise import NoiseSpectrum


OMEGA = 5.0
SPACE = qubit_space()


def driven_h(amp=0.3, freq=5.0):
    sz, sx = sigma_z().matrix, sigma_x().matrix

    def h_t(t):
        return Operator(0.5 * OMEGA * sz + amp * np.cos(freq * t) * sx, SPACE)

    return h_t, 2.0 * np.pi / freq


def test_undriven_quasienergies_fold_to_first_zone():
    h = Operator(0.5 * OMEGA * sigma_z().matrix, SPACE)
    freq = 3.1
    period = 2.0 * np.pi / freq
    basis = floquet_modes(lambda t: h, period, steps=256)
    eigs = np.array([-0.5 * OMEGA, 0.5 * OMEGA])
    folded = np.sort((eigs + 0.5 * freq) % freq - 0.5 * freq)
    assert np.abs(np.sort(basis.quasienergies) - folded).max() < 1e-10


def test_one_period_propagator_unitary():
    h_t, period = driven_h()
    basis = floquet_modes(h_t, period, steps=256)
    u = basis.u_period
    assert np.abs(u @ u.conj().T - np.eye(2)).max() < 1e-12


def test_propagator_composition():
    # U(t + T) = U(t) U(T) for the monodromy structure
    h_t, period = driven_h()
    basis = floquet_modes(h_t, period, steps=512)
    t = 0.37 * period
    lhs = propagator_at(basis, t + period)
    rhs = propagator_at(basis, t) @ basis.u_period
    assert np.abs(lhs - rhs).max() < 1e-9


def test_reconstruction_matches_direct_integration():
    h_t, period = driven_h(amp=0.4)
    basis = floquet_modes(h_t, period, steps=512)
    psi0 = basis_ket(SPACE, 1)
    times = np.linspace(0.0, 5.0 * period, 41)
    recon = reconstruct(basis, psi0, times)

    def rhs(t, y):
        return -1j * (h_t(t).matrix @ y)

    sol = solve_ivp(rhs, (0.0, times[-1]), psi0.amplitudes.astype(complex),
                    t_eval=times, rtol=1e-12, atol=1e-14)
    err = np.abs(recon.T - sol.y).max()
    assert err < 1e-7


def test_couplings_hermitian_pairing():
    h_t, period = driven_h()
    basis = floquet_modes(h_t, period, steps=256)
    coup = floquet_couplings(basis, sigma_x(), kmax=8)
    assert max(coup.parseval_deficit.values()) < 1e-6
    # upward transitions sample the comb at -eps01 + k Omega, downward at
    # +eps01 + k Omega, dephasing at the drive harmonics
    comb = coup.k_values * coup.omega_drive
    assert np.allclose(coup.omega_plus, -coup.epsilon01 + comb)
    assert np.allclose(coup.omega_minus, coup.epsilon01 + comb)
    assert np.allclose(coup.omega_phi, comb)


def test_undriven_rates_reduce_to_golden_rule():
    # zero drive amplitude: only the k = 0 sideband contributes and the
    # decay rate is S(omega_q) with the transverse matrix element of one
    h_t, period = driven_h(amp=0.0)
    basis = floquet_modes(h_t, period, steps=512)
    coup = floquet_couplings(basis, sigma_x(), kmax=6)
    s0 = 0.02
    rates = floquet_rates(coup, NoiseSpectrum.flat(s0))
    assert rates.gamma_plus + rates.gamma_minus == pytest.approx(2.0 * s0,
                                                                 rel=1e-6)
    assert rates.gamma_phi == pytest.approx(0.0, abs=1e-10)


def test_filter_function_sharpens_on_comb():
    # the sinc sum peaks on the sideband comb and the peak height grows
    # linearly with t as each sinc narrows
    h_t, period = driven_h()
    basis = floquet_modes(h_t, period, steps=256)
    coup = floquet_couplings(basis, sigma_x(), kmax=6)
    k_dom = int(np.argmax(np.abs(coup.g_plus)))
    w_peak = coup.omega_plus[k_dom]
    f1 = filter_function(coup, "plus", w_peak, t=20.0)
    f2 = filter_function(coup, "plus", w_peak, t=40.0)
    assert f2 / f1 == pytest.approx(2.0, rel=0.05)
    # off the comb the filter is much smaller than on it
    off = filter_function(coup, "plus", w_peak + 0.5, t=40.0)
    assert abs(off) < 0.1 * f2


def test_driven_solver_trace_preserved():
    h_t, period = driven_h(amp=0.2)
    basis = floquet_modes(h_t, period, steps=256)
    coup = floquet_couplings(basis, sigma_x(), kmax=6)
    rho0 = basis_ket(SPACE, 1).dm()
    times = np.linspace(0.0, 10.0, 21)
    res = solve_floquet_markov(basis, coup, NoiseSpectrum.flat(0.01),
                               rho0, times, observables={"sz": sigma_z()},
                               store_states=True)
    for s in res.states:
        assert abs(np.trace(s.matrix) - 1.0) < 1e-9
    assert res.expectations["sz"][0] == pytest.approx(1.0, abs=1e-9)


def test_rejects_aperiodic_hamiltonian():
    sz, sx = sigma_z().matrix, sigma_x().matrix

    def h_t(t):
        return Operator(0.5 * OMEGA * sz + 0.3 * np.cos(1.7 * t) * sx, SPACE)

    with pytest.raises(ConfigError):
        floquet_modes(h_t, 2.0 * np.pi / 5.0, steps=128)


def test_rejects_coarse_steps():
    h_t, period = driven_h()
    with pytest.raises(ConfigError):
        floquet_modes(h_t, period, steps=50)
