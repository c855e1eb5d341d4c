"""Floquet analysis of periodically driven qubits.

The one-period propagator is built by fourth-order commutator-free stepping
(two Hermitian exponentials per step, Gauss-node samples of H), so U(T,0) is
unitary to roundoff.  Quasienergies come from its Schur form, folded to
[-Omega/2, Omega/2), and modes at intra-period times follow from
Phi_a(t) = e^{i eps_a t} U(t,0) Phi_a(0).

Coupling coefficients g_{k,mu} are Fourier components of the qubit coupling
operator sandwiched between modes; together with a noise spectrum they give
the driven decoherence rates and the sinc-shaped filter functions.  The
Floquet-Markov master equation is solved in the Floquet frame, where the
jump operators are the constant t = 0 mode outer products.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from typing import Mapping, Optional

import numpy as np
import scipy.linalg

from . import core
from .core import HilbertSpace, Ket, Operator
from .errors import ConfigError, InvariantViolation
from .lindblad import EvolutionResult, LindbladModel, _check_times, _report, solve_lindblad
from .noise import NoiseSpectrum

DEFAULT_STEPS = 256
UNITARITY_TOL = 1e-10
MODE_TOL = 1e-8

# Gauss-Legendre nodes and the two commutator-free weights
_C1 = 0.5 - math.sqrt(3.0) / 6.0
_C2 = 0.5 + math.sqrt(3.0) / 6.0
_A_MAIN = (3.0 + 2.0 * math.sqrt(3.0)) / 12.0
_A_CROSS = (3.0 - 2.0 * math.sqrt(3.0)) / 12.0

_ZETA = {"plus": 1.0, "minus": 1.0, "phi": 0.5}


@dataclasses.dataclass(frozen=True)
class FloquetBasis:
    """One-period propagator diagonalization of a time-periodic Hamiltonian.

    modes[k] holds the mode vectors at grid time times[k] as columns, ordered
    by ascending quasienergy; propagators[k] = U(times[k], 0).
    """

    period: float
    omega: float
    quasienergies: np.ndarray
    times: np.ndarray
    modes: np.ndarray
    propagators: np.ndarray
    u_period: np.ndarray
    space: HilbertSpace
    h_fn: object = dataclasses.field(repr=False)

    def __post_init__(self):
        dim = self.space.total
        eye = np.eye(dim)
        if np.abs(self.u_period.conj().T @ self.u_period - eye).max() > UNITARITY_TOL:
            raise InvariantViolation("one-period propagator is not unitary")
        half = self.omega / 2.0
        if np.any(self.quasienergies < -half) or np.any(self.quasienergies >= half):
            raise InvariantViolation("quasienergies not folded to [-Omega/2, Omega/2)")
        for k in range(self.times.size):
            m = self.modes[k]
            if np.abs(m.conj().T @ m - eye).max() > MODE_TOL:
                raise InvariantViolation(f"modes not orthonormal at grid index {k}")
        if np.abs(self.modes[-1] - self.modes[0]).max() > MODE_TOL:
            raise InvariantViolation("modes are not periodic over one period")


def _cf4_step(h_fn, t: float, dt: float) -> np.ndarray:
    h1 = np.asarray(h_fn(t + _C1 * dt), dtype=complex)
    h2 = np.asarray(h_fn(t + _C2 * dt), dtype=complex)
    first = _A_MAIN * h1 + _A_CROSS * h2
    second = _A_CROSS * h1 + _A_MAIN * h2
    return core._expm_hermitian_generator(second, dt) @ core._expm_hermitian_generator(first, dt)


def floquet_modes(h_t, period: float, steps: int = DEFAULT_STEPS) -> FloquetBasis:
    """Diagonalize U(T,0) and tabulate Floquet modes on a uniform grid."""
    if period <= 0:
        raise ConfigError("period must be positive")
    if steps < 100:
        raise ConfigError("steps must be >= 100 to resolve the drive")
    h_fn = core.hamiltonian_matrix_fn(h_t)
    if isinstance(h_t, Operator):
        space = h_t.space
    else:
        space = HilbertSpace((h_fn(0.0).shape[0],))

    scale = max(1.0, np.abs(h_fn(0.0)).max())
    for frac in (0.1372, 0.5, 0.8613):
        t = frac * period
        ht = np.asarray(h_fn(t), dtype=complex)
        if np.abs(ht - ht.conj().T).max() > core.HERMITICITY_TOL * scale:
            raise ConfigError(f"hamiltonian is not Hermitian at t={t}")
        if np.abs(ht - np.asarray(h_fn(t + period), dtype=complex)).max() > 1e-10 * scale:
            raise ConfigError("hamiltonian is not periodic with the given period")

    dim = space.total
    dt = period / steps
    times = np.linspace(0.0, period, steps + 1)
    props = np.empty((steps + 1, dim, dim), dtype=complex)
    props[0] = np.eye(dim)
    for k in range(steps):
        props[k + 1] = _cf4_step(h_fn, times[k], dt) @ props[k]
    u_period = props[-1]

    t_schur, z = scipy.linalg.schur(u_period, output="complex")
    off = np.abs(t_schur - np.diag(np.diag(t_schur))).max()
    if off > 1e-8:
        raise InvariantViolation("one-period propagator failed to diagonalize unitarily")
    eigvals = np.diag(t_schur)
    quasi = -np.angle(eigvals) / period
    # stable sort keeps the Schur order among degenerate quasienergies
    order = np.argsort(quasi, kind="stable")
    quasi = quasi[order]
    z = z[:, order]

    phases = np.exp(1j * np.outer(times, quasi))
    modes = np.einsum("kij,jm,km->kim", props, z, phases, optimize=True)
    return FloquetBasis(
        period=float(period), omega=2.0 * math.pi / period, quasienergies=quasi,
        times=times, modes=modes, propagators=props, u_period=u_period,
        space=space, h_fn=h_fn,
    )


def _u_tau(basis: FloquetBasis, tau: float) -> np.ndarray:
    """U(tau, 0) for tau in [0, period], reusing the grid where possible."""
    times = basis.times
    tol = 1e-9 * basis.period
    k = int(np.searchsorted(times, tau))
    if k < times.size and abs(times[k] - tau) <= tol:
        return basis.propagators[k]
    if k > 0 and abs(times[k - 1] - tau) <= tol:
        return basis.propagators[k - 1]
    k = max(k - 1, 0)
    return _cf4_step(basis.h_fn, times[k], tau - times[k]) @ basis.propagators[k]


def propagator_at(basis: FloquetBasis, t: float) -> np.ndarray:
    """U(t, 0) for any t >= 0 via periodicity of H."""
    if t < 0:
        raise ConfigError("propagator_at requires t >= 0")
    n, tau = divmod(float(t), basis.period)
    n = int(round(n))
    u = _u_tau(basis, tau)
    if n:
        u = u @ np.linalg.matrix_power(basis.u_period, n)
    return u


def mode_at(basis: FloquetBasis, t: float) -> np.ndarray:
    """Mode vectors (columns) at arbitrary t, using Phi(t + T) = Phi(t)."""
    tau = float(t) % basis.period
    u = _u_tau(basis, tau)
    return (u @ basis.modes[0]) * np.exp(1j * basis.quasienergies * tau)


def reconstruct(basis: FloquetBasis, psi0: Ket, times) -> np.ndarray:
    """States sum_a c_a e^{-i eps_a t} Phi_a(t) with c_a = <Phi_a(0)|psi0>."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if psi0.space != basis.space:
        raise ConfigError("psi0 space does not match basis")
    c = basis.modes[0].conj().T @ psi0.amplitudes
    out = np.empty((times.size, basis.space.total), dtype=complex)
    for i, t in enumerate(times):
        out[i] = (mode_at(basis, t) * np.exp(-1j * basis.quasienergies * t)) @ c
    return out


@dataclasses.dataclass(frozen=True)
class FloquetCouplings:
    """Fourier components of a coupling operator between Floquet modes.

    Index arrays run over k = -kmax .. kmax; omega_<mu>[i] is the filter
    frequency attached to g_<mu>[i].  c_plus/c_minus/c_phi are the constant
    Floquet-frame jump operators (t = 0 mode outer products, lab basis).
    """

    k_values: np.ndarray
    g_plus: np.ndarray
    g_minus: np.ndarray
    g_phi: np.ndarray
    omega_plus: np.ndarray
    omega_minus: np.ndarray
    omega_phi: np.ndarray
    c_plus: Operator
    c_minus: Operator
    c_phi: Operator
    epsilon01: float
    omega_drive: float
    parseval_deficit: dict


def floquet_couplings(basis: FloquetBasis, sigma: Operator, kmax: int) -> FloquetCouplings:
    """Trapezoidal Fourier components of the mode-frame coupling operator."""
    if basis.space.total != 2:
        raise ConfigError("couplings are defined for two-level bases")
    if sigma.space != basis.space:
        raise ConfigError("sigma space does not match basis")
    if not sigma.is_hermitian():
        raise ConfigError("sigma must be Hermitian")
    if kmax < 1:
        raise ConfigError("kmax must be >= 1")
    n_steps = basis.times.size - 1
    if 2 * kmax >= n_steps:
        raise ConfigError("kmax exceeds the Nyquist index of the mode grid")

    s = sigma.matrix
    m0 = basis.modes[:, :, 0]
    m1 = basis.modes[:, :, 1]
    f_minus = np.einsum("ti,ij,tj->t", m0.conj(), s, m1)
    f_plus = np.einsum("ti,ij,tj->t", m1.conj(), s, m0)
    f_phi = 0.5 * (np.einsum("ti,ij,tj->t", m1.conj(), s, m1)
                   - np.einsum("ti,ij,tj->t", m0.conj(), s, m0))

    period = basis.period
    tgrid = basis.times
    ks = np.arange(-kmax, kmax + 1)

    def fourier(f):
        kernel = np.exp(1j * np.outer(ks, basis.omega * tgrid))
        return np.trapezoid(kernel * f[None, :], tgrid, axis=1) / period

    g_minus = fourier(f_minus)
    g_plus = fourier(f_plus)
    g_phi = fourier(f_phi)

    scale = max(np.abs(s).max(), 1e-30)
    pair = np.abs(g_plus - np.conj(g_minus[::-1])).max()
    pair = max(pair, np.abs(g_phi - np.conj(g_phi[::-1])).max())
    if pair > 1e-10 * scale:
        raise InvariantViolation("Hermitian coupling pairing g_{k+} = conj(g_{-k,-}) failed")

    deficit = {}
    for name, g, f in (("plus", g_plus, f_plus), ("minus", g_minus, f_minus),
                       ("phi", g_phi, f_phi)):
        total = np.trapezoid(np.abs(f) ** 2, tgrid) / period
        captured = float(np.sum(np.abs(g) ** 2))
        deficit[name] = float(max(total - captured, 0.0) / total) if total > 1e-30 else 0.0
    worst = max(deficit.values())
    if worst > 0.01:
        warnings.warn(
            f"kmax={kmax} leaves {100 * worst:.1f}% of the coupling power "
            f"untruncated; suggest kmax={2 * kmax}",
            stacklevel=2,
        )

    eps01 = float(basis.quasienergies[1] - basis.quasienergies[0])
    p0 = basis.modes[0]
    space = basis.space
    c_minus = Operator(np.outer(p0[:, 0], p0[:, 1].conj()), space)
    c_plus = Operator(np.outer(p0[:, 1], p0[:, 0].conj()), space)
    c_phi = Operator(np.outer(p0[:, 1], p0[:, 1].conj())
                     - np.outer(p0[:, 0], p0[:, 0].conj()), space)
    return FloquetCouplings(
        k_values=ks,
        g_plus=g_plus, g_minus=g_minus, g_phi=g_phi,
        omega_plus=-eps01 + ks * basis.omega,
        omega_minus=eps01 + ks * basis.omega,
        omega_phi=ks * basis.omega,
        c_plus=c_plus, c_minus=c_minus, c_phi=c_phi,
        epsilon01=eps01, omega_drive=basis.omega,
        parseval_deficit=deficit,
    )


def filter_function(couplings: FloquetCouplings, mu: str, omega, t: float):
    """Sinc-sum filter F_mu(omega, t); sharpens onto the omega_k comb as t grows."""
    if mu not in _ZETA:
        raise ConfigError("mu must be one of 'plus', 'minus', 'phi'")
    if t <= 0:
        raise ConfigError("filter_function requires t > 0")
    g = {"plus": couplings.g_plus, "minus": couplings.g_minus,
         "phi": couplings.g_phi}[mu]
    w_k = {"plus": couplings.omega_plus, "minus": couplings.omega_minus,
           "phi": couplings.omega_phi}[mu]
    omega_arr = np.atleast_1d(np.asarray(omega, dtype=float))
    # np.sinc is the normalized sinc; divide the argument by pi for sin(x)/x
    x = (omega_arr[:, None] - w_k[None, :]) * t
    vals = t * np.sinc(x / np.pi) * (np.abs(g) ** 2)[None, :]
    out = vals.sum(axis=1) / (np.pi * _ZETA[mu])
    return out if np.ndim(omega) else float(out[0])


@dataclasses.dataclass(frozen=True)
class FloquetRates:
    gamma_plus: float
    gamma_minus: float
    gamma_phi: float


def floquet_rates(couplings: FloquetCouplings, spectrum: NoiseSpectrum) -> FloquetRates:
    """Decoherence rates gamma_± = sum |g|^2 S and gamma_phi = sum 2|g|^2 S."""
    gp = float(np.sum(np.abs(couplings.g_plus) ** 2 * spectrum(couplings.omega_plus)))
    gm = float(np.sum(np.abs(couplings.g_minus) ** 2 * spectrum(couplings.omega_minus)))
    mask = np.ones(couplings.k_values.size, dtype=bool)
    if getattr(spectrum, "singular_at_zero", False):
        mask = couplings.omega_phi != 0.0
        if not mask.all():
            warnings.warn(
                "spectrum is singular at zero frequency; skipping the k = 0 "
                "dephasing term (treat quasistatic dephasing separately)",
                stacklevel=2,
            )
    w_phi = couplings.omega_phi[mask]
    g_phi = couplings.g_phi[mask]
    gphi = float(np.sum(2.0 * np.abs(g_phi) ** 2 * spectrum(w_phi)))
    return FloquetRates(gamma_plus=gp, gamma_minus=gm, gamma_phi=gphi)


def solve_floquet_markov(
    basis: FloquetBasis,
    couplings: FloquetCouplings,
    spectrum: NoiseSpectrum,
    rho0,
    times,
    observables: Optional[Mapping[str, Operator]] = None,
    store_states: bool = False,
) -> EvolutionResult:
    """Floquet-frame master equation with constant jump operators.

    The frame transform U_q(t) = sum_a e^{-i eps_a t}|Phi_a(t)><Phi_a(0)| is
    the identity at t = 0, so rho0 enters unchanged; lab-frame states are
    reported.
    """
    times = _check_times(times)
    if rho0.space != basis.space:
        raise ConfigError("rho0 space does not match basis")
    rates = floquet_rates(couplings, spectrum)
    channels = (
        (couplings.c_plus, rates.gamma_plus),
        (couplings.c_minus, rates.gamma_minus),
        (couplings.c_phi, rates.gamma_phi / 2.0),
    )
    zero_h = Operator(np.zeros((basis.space.total,) * 2, dtype=complex), basis.space)
    frame = solve_lindblad(
        LindbladModel(zero_h, channels), rho0, times, store_states=True, method="expm"
    )

    p0_dag = basis.modes[0].conj().T
    lab = np.empty((times.size, 2, 2), dtype=complex)
    for i, t in enumerate(times):
        q = (mode_at(basis, t) * np.exp(-1j * basis.quasienergies * t)) @ p0_dag
        lab[i] = q @ frame.states[i].matrix @ q.conj().T
    extra = {
        "gamma_plus": rates.gamma_plus,
        "gamma_minus": rates.gamma_minus,
        "gamma_phi": rates.gamma_phi,
    }
    return _report(times, lab, basis.space, observables, store_states, extra)
