"""Driven-cavity response, reflection identities, dispersive readout."""

from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from sqsim.errors import ConfigError
from sqsim.inout import (
    CavityPort,
    DriveTone,
    continuous_phase,
    dispersive_readout_curve,
    mean_cavity_response,
    output_field,
    photon_loss_rate,
    reflection_coefficient,
    steady_state_amplitude,
)


def test_photon_loss_rate_rational_exactness():
    kappa = photon_loss_rate(Fraction(50), Fraction(1, 100), Fraction(3, 10),
                             Fraction(2))
    assert kappa == Fraction(50) * Fraction(1, 100) ** 2 * Fraction(4) / Fraction(3, 10)
    assert isinstance(kappa, Fraction)


def test_photon_loss_rate_floats():
    kappa = photon_loss_rate(50.0, 0.01, 0.3, 2.0)
    assert kappa == pytest.approx(50.0 * 1e-4 * 4.0 / 0.3)


def test_photon_loss_rate_validation():
    with pytest.raises(ConfigError):
        photon_loss_rate(-1.0, 0.01, 0.3, 2.0)
    with pytest.raises(ConfigError):
        photon_loss_rate(50.0, 0.01, 0.0, 2.0)


def test_steady_state_amplitude():
    port = CavityPort(omega_r=7.0, kappa=0.02)
    drive = DriveTone(beta_in=0.5, omega_d=7.0)
    a = steady_state_amplitude(port, drive)
    # on resonance: a = sqrt(kappa) beta / (kappa/2)
    assert a == pytest.approx(np.sqrt(0.02) * 0.5 / 0.01)


def test_cavity_response_matches_ode():
    port = CavityPort(omega_r=7.0, kappa=0.4)
    drive = DriveTone(beta_in=0.3 + 0.2j, omega_d=6.8)
    times = np.linspace(0.0, 30.0, 121)
    res = mean_cavity_response(port, drive, times, a0=0.1j)

    delta = port.omega_r - drive.omega_d

    def rhs(t, y):
        a = y[0] + 1j * y[1]
        da = -(1j * delta + 0.5 * port.kappa) * a \
            + np.sqrt(port.kappa) * drive.beta_in
        return [da.real, da.imag]

    sol = solve_ivp(rhs, (0.0, 30.0), [0.0, 0.1], t_eval=times,
                    rtol=1e-10, atol=1e-12)
    ref = sol.y[0] + 1j * sol.y[1]
    assert np.abs(res.amplitude - ref).max() < 1e-6
    # transient decays as e^{-kappa t / 2}; at t = 30 that is ~e^{-6}
    assert abs(res.amplitude[-1] - res.steady_state) < 5e-3


def test_output_field_on_resonance_phase_flip():
    port = CavityPort(omega_r=5.0, kappa=0.1)
    drive = DriveTone(beta_in=1.0, omega_d=5.0)
    a = steady_state_amplitude(port, drive)
    b_out = output_field(drive.beta_in, a, port.kappa)
    assert b_out == pytest.approx(-1.0)


def test_reflection_unit_modulus():
    port = CavityPort(omega_r=7.0, kappa=0.05)
    omega = np.linspace(6.5, 7.5, 201)
    r = reflection_coefficient(port, omega)
    assert np.abs(np.abs(r) - 1.0).max() < 1e-12
    # resonance reflects with a pi phase
    r0 = reflection_coefficient(port, 7.0)
    assert r0 == pytest.approx(-1.0)


def test_reflection_far_detuned_is_unity():
    port = CavityPort(omega_r=7.0, kappa=0.05)
    r = reflection_coefficient(port, 7.0 + 500.0)
    assert r == pytest.approx(1.0, abs=1e-3)


def test_continuous_phase_monotone():
    port = CavityPort(omega_r=7.0, kappa=0.05)
    omega = np.linspace(6.0, 8.0, 401)
    phase = continuous_phase(port, omega)
    # rises from ~0 to ~2 pi through pi at resonance, no wrap jumps
    assert np.all(np.diff(phase) > 0.0)
    assert continuous_phase(port, 7.0) == pytest.approx(np.pi)


def test_dispersive_separation_formula():
    kappa = 0.01
    port = CavityPort(omega_r=7.0, kappa=kappa)
    for chi in (0.001, 0.005, 0.02):
        curves = dispersive_readout_curve(port, chi, np.array([7.0]))
        expect = 4.0 * np.arctan(2.0 * chi / kappa)
        assert curves.phase_separation[0] == pytest.approx(expect, abs=1e-12)


def test_dispersive_separation_monotone_in_chi():
    kappa = 0.01
    port = CavityPort(omega_r=7.0, kappa=kappa)
    seps = [dispersive_readout_curve(port, chi, np.array([7.0])).max_separation
            for chi in (0.002, 0.005, 0.01, 0.02)]
    assert np.all(np.diff(seps) > 0.0)


def test_readout_curves_best_point():
    port = CavityPort(omega_r=7.0, kappa=0.01)
    omega = np.linspace(6.98, 7.02, 401)
    curves = dispersive_readout_curve(port, 0.004, omega)
    # symmetric pulls put the best drive at bare resonance
    assert curves.best_omega_d == pytest.approx(7.0, abs=1e-4)
    assert curves.max_separation == pytest.approx(
        4.0 * np.arctan(2.0 * 0.004 / 0.01), abs=1e-6)
    assert np.abs(np.abs(curves.r_plus) - 1.0).max() < 1e-12
    assert np.abs(np.abs(curves.r_minus) - 1.0).max() < 1e-12


def test_port_validation():
    with pytest.raises(ConfigError):
        CavityPort(omega_r=5.0, kappa=0.0)
    with pytest.raises(ConfigError):
        DriveTone(beta_in=float("nan"), omega_d=5.0)
