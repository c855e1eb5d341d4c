"""Mean-field input-output theory for a single-port readout resonator.

Everything here is closed form.  The intracavity amplitude obeys

    d<a>/dt = -(i*delta + kappa/2)<a> + sqrt(kappa)*beta_in,

in the frame rotating at the drive, with delta = omega_r - omega_d.  The
output field is b_out = b_in - sqrt(kappa)<a>; with this phase convention a
lossless single port is unitary, |r| = 1 at every detuning, and the
on-resonance reflection is -1.  Dispersive readout evaluates the same
reflection with the cavity pulled to omega_r +- chi by the qubit state.
"""

from __future__ import annotations

import cmath
import dataclasses
from typing import Optional

import numpy as np

from .errors import ConfigError


def photon_loss_rate(z_tml, c_k, c_r, omega_r):
    """Port decay rate z_tml * c_k**2 * omega_r**2 / c_r.

    Plain arithmetic so exact types (int, Fraction) pass through exactly.
    """
    for name, val in (("z_tml", z_tml), ("c_k", c_k), ("c_r", c_r),
                      ("omega_r", omega_r)):
        if val <= 0:
            raise ConfigError(f"{name} must be positive")
    return z_tml * c_k * c_k * omega_r * omega_r / c_r


@dataclasses.dataclass(frozen=True)
class CavityPort:
    """Single readout port: bare frequency and photon-loss rate."""

    omega_r: float
    kappa: float

    def __post_init__(self):
        if self.kappa <= 0:
            raise ConfigError("kappa must be positive")

    @classmethod
    def from_circuit(cls, omega_r: float, z_tml, c_k, c_r) -> "CavityPort":
        kappa = photon_loss_rate(z_tml, c_k, c_r, omega_r)
        return cls(omega_r=float(omega_r), kappa=float(kappa))


@dataclasses.dataclass(frozen=True)
class DriveTone:
    """Coherent drive: mean input amplitude and tone frequency."""

    beta_in: complex
    omega_d: float

    def __post_init__(self):
        if not (np.isfinite(self.omega_d) and np.isfinite(complex(self.beta_in))):
            raise ConfigError("drive parameters must be finite")


@dataclasses.dataclass(frozen=True)
class CavityResponse:
    times: np.ndarray
    amplitude: np.ndarray
    steady_state: complex
    detuning: float


def steady_state_amplitude(port: CavityPort, drive: DriveTone) -> complex:
    delta = port.omega_r - drive.omega_d
    return cmath.sqrt(port.kappa) * complex(drive.beta_in) / (1j * delta + port.kappa / 2.0)


def mean_cavity_response(port: CavityPort, drive: DriveTone, times,
                         a0: complex = 0.0) -> CavityResponse:
    """Analytic transient a(t) = a_ss + (a0 - a_ss) e^{-(i delta + kappa/2)t}."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise ConfigError("need a 1-d time grid")
    delta = port.omega_r - drive.omega_d
    a_ss = steady_state_amplitude(port, drive)
    pole = 1j * delta + port.kappa / 2.0
    amp = a_ss + (complex(a0) - a_ss) * np.exp(-pole * times)
    return CavityResponse(times=times, amplitude=amp, steady_state=a_ss,
                          detuning=delta)


def output_field(b_in_mean: complex, a_mean, kappa: float):
    """b_out = b_in - sqrt(kappa) <a> (unitary lossless-port convention)."""
    if kappa <= 0:
        raise ConfigError("kappa must be positive")
    return b_in_mean - np.sqrt(kappa) * np.asarray(a_mean)


def reflection_coefficient(port: CavityPort, omega_d) -> np.ndarray:
    """Steady-state r(omega_d) = 1 - kappa / (i(omega_r - omega_d) + kappa/2)."""
    delta = port.omega_r - np.asarray(omega_d, dtype=float)
    return 1.0 - port.kappa / (1j * delta + port.kappa / 2.0)


@dataclasses.dataclass(frozen=True)
class ReadoutCurves:
    """Reflection vs drive frequency for the two dispersively shifted cavities."""

    omega_d: np.ndarray
    r_plus: np.ndarray
    r_minus: np.ndarray
    phase_separation: np.ndarray
    max_separation: float
    best_omega_d: float


def continuous_phase(port: CavityPort, omega_d) -> np.ndarray:
    """arg r on its continuous branch, pi - 2 arctan(2(omega_r - omega_d)/kappa).

    Runs from 0 (far below the line) through pi (resonance) to 2 pi (far
    above), with no wrap anywhere in between.
    """
    delta = port.omega_r - np.asarray(omega_d, dtype=float)
    return np.pi - 2.0 * np.arctan(2.0 * delta / port.kappa)


def dispersive_readout_curve(port: CavityPort, chi: float, omega_d) -> ReadoutCurves:
    """Reflection curves with the cavity pulled to omega_r +- chi.

    phase_separation is the difference of the two continuous phase rolls,
    |phi_plus - phi_minus|, so it grows monotonically with chi/kappa and can
    exceed pi for strongly resolved shifts; for chi/kappa <= 1/2 it agrees
    with the plain angle between r_plus and r_minus.  The separation peaks
    at the bare resonance, where it equals 4 arctan(2 chi / kappa).
    """
    omega_d = np.atleast_1d(np.asarray(omega_d, dtype=float))
    up = CavityPort(omega_r=port.omega_r + chi, kappa=port.kappa) if chi else port
    dn = CavityPort(omega_r=port.omega_r - chi, kappa=port.kappa) if chi else port
    r_p = reflection_coefficient(up, omega_d)
    r_m = reflection_coefficient(dn, omega_d)
    sep = np.abs(continuous_phase(up, omega_d) - continuous_phase(dn, omega_d))
    best = int(np.argmax(sep))
    return ReadoutCurves(omega_d=omega_d, r_plus=r_p, r_minus=r_m,
                         phase_separation=sep,
                         max_separation=float(sep[best]),
                         best_omega_d=float(omega_d[best]))
