"""Noise spectral densities, qubit sensitivity coefficients, weak-coupling rates.

Two spectral conventions coexist in the literature and both appear here,
deliberately:

* `NoiseSpectrum` values fed to the Redfield and Floquet machinery are
  plain power spectra, S(w) = Int dt e^{i w t} <eta(t) eta(0)>.
* `golden_rule_rates` applies the textbook parameter-noise formulas
  Gamma_1 = pi D_perp^2 S_lambda(omega_q) and Gamma_phi = pi D_z^2
  S_lambda(0), whose S_lambda carries a 1/(2 pi) normalization relative
  to the above.  Feeding the same numeric spectrum to both conventions
  therefore differs by 2 pi; convert explicitly when cross-checking.

Temperatures are quoted in angular-frequency units (Boltzmann constant
folded in).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import Operator
from .errors import ConfigError, ConvergenceError, SingularSpectrumError

__all__ = [
    "NoiseSpectrum",
    "SensitivityCoefficients",
    "RateResult",
    "sensitivity",
    "circuit_sensitivity",
    "golden_rule_rates",
]


@dataclass(frozen=True)
class NoiseSpectrum:
    """Noise power spectrum S(omega), one of a few stock shapes.

    Build through the classmethods: `flat`, `one_over_f`, `dielectric`,
    `tabulated`, or `custom`.  Instances are callable and vectorize over
    frequency arrays.
    """

    kind: str
    s0: float = 0.0
    amplitude: float = 0.0
    temperature: float = 0.0
    table_omegas: Optional[np.ndarray] = field(default=None, repr=False)
    table_values: Optional[np.ndarray] = field(default=None, repr=False)
    fn: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    singular_at_zero: bool = False

    @classmethod
    def flat(cls, s0: float) -> "NoiseSpectrum":
        """White spectrum, S(omega) = s0 at every frequency."""
        if s0 < 0.0:
            raise ConfigError(f"flat spectrum level must be non-negative, got {s0}")
        return cls(kind="flat", s0=float(s0))

    @classmethod
    def one_over_f(cls, a_f: float) -> "NoiseSpectrum":
        """S(omega) = a_f^2 |omega / 2 pi|^-1; diverges at omega = 0."""
        return cls(kind="one_over_f", amplitude=float(a_f), singular_at_zero=True)

    @classmethod
    def dielectric(cls, a_d: float, temperature: float) -> "NoiseSpectrum":
        """S(omega) = alpha(omega, T) a_d (omega / 2 pi)^2.

        alpha = |coth(omega / 2 T) + 1| / 2 interpolates between emission
        (alpha -> 1 for omega >> T) and the thermally enhanced low-frequency
        side; absorption (omega < 0) is exponentially suppressed at T -> 0.
        """
        if a_d < 0.0:
            raise ConfigError(f"dielectric amplitude must be non-negative, got {a_d}")
        if temperature < 0.0:
            raise ConfigError(f"temperature must be non-negative, got {temperature}")
        return cls(kind="dielectric", amplitude=float(a_d), temperature=float(temperature))

    @classmethod
    def tabulated(cls, omegas, values) -> "NoiseSpectrum":
        """Linear interpolation of (omega, S) samples; clamps and warns outside."""
        om = np.asarray(omegas, dtype=float)
        val = np.asarray(values, dtype=float)
        if om.ndim != 1 or om.shape != val.shape or om.size < 2:
            raise ConfigError("tabulated spectrum needs matching 1-d omega and value arrays")
        if np.any(np.diff(om) <= 0.0):
            raise ConfigError("tabulated omegas must be strictly increasing")
        if np.any(val < 0.0):
            raise ConfigError("tabulated spectrum values must be non-negative")
        om = om.copy()
        val = val.copy()
        om.flags.writeable = False
        val.flags.writeable = False
        return cls(kind="tabulated", table_omegas=om, table_values=val)

    @classmethod
    def custom(cls, fn: Callable, singular_at_zero: bool = False) -> "NoiseSpectrum":
        """Wrap an arbitrary spectrum callable S(omega)."""
        if not callable(fn):
            raise ConfigError("custom spectrum needs a callable")
        return cls(kind="custom", fn=fn, singular_at_zero=singular_at_zero)

    # -- evaluation ----------------------------------------------------

    def __call__(self, omega):
        om = np.asarray(omega, dtype=float)
        scalar = om.ndim == 0
        om = np.atleast_1d(om)
        if self.kind == "flat":
            out = np.full_like(om, self.s0)
        elif self.kind == "one_over_f":
            if np.any(om == 0.0):
                raise SingularSpectrumError("1/f spectrum diverges at omega = 0")
            out = self.amplitude ** 2 / np.abs(om / (2.0 * np.pi))
        elif self.kind == "dielectric":
            out = self._dielectric(om)
        elif self.kind == "tabulated":
            lo, hi = self.table_omegas[0], self.table_omegas[-1]
            if np.any(om < lo) or np.any(om > hi):
                warnings.warn(
                    f"tabulated spectrum evaluated outside [{lo:g}, {hi:g}]; clamping",
                    stacklevel=2,
                )
            out = np.interp(om, self.table_omegas, self.table_values)
        elif self.kind == "custom":
            if self.singular_at_zero and np.any(om == 0.0):
                raise SingularSpectrumError("custom spectrum declared singular at omega = 0")
            out = np.asarray(self.fn(om), dtype=float)
            if out.shape != om.shape:
                out = np.broadcast_to(out, om.shape).copy()
        else:  # pragma: no cover
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        if scalar:
            return float(out[0])
        return out

    def _dielectric(self, om: np.ndarray) -> np.ndarray:
        out = np.zeros_like(om)
        nz = om != 0.0
        if self.temperature == 0.0:
            alpha = (om[nz] > 0.0).astype(float)
        else:
            x = om[nz] / (2.0 * self.temperature)
            alpha = np.abs(1.0 / np.tanh(x) + 1.0) / 2.0
        out[nz] = alpha * self.amplitude * (om[nz] / (2.0 * np.pi)) ** 2
        return out


@dataclass(frozen=True)
class SensitivityCoefficients:
    """Finite-difference derivatives of a qubit splitting w.r.t. a control.

    d_z is the longitudinal linear coefficient (first derivative of the
    splitting), d2_omega the bare second derivative, d2_z the second-order
    longitudinal coefficient including the transverse correction
    d2_omega - d_perp^2 / omega_q, and d_perp = 2 |<1| dH/dlambda |0>|.
    """

    lambda_name: str
    omega_q: float
    d_z: float
    d2_omega: float
    d2_z: float
    d_perp: float


def _splitting(h: Operator) -> float:
    vals = np.linalg.eigvalsh(h.matrix)
    return float(vals[1] - vals[0])


def _richardson_guard(coarse, fine, floor, what):
    resid = abs(coarse - fine)
    if resid > max(0.01 * max(abs(coarse), abs(fine)), floor):
        raise ConvergenceError(
            f"{what}: central differences at delta and delta/2 disagree by {resid:.3e}; "
            "the step is too large for the requested derivative"
        )


def sensitivity(
    h_of_lambda: Callable[[float], Operator],
    lambda0: float,
    delta: float,
    lambda_name: str = "lambda",
) -> SensitivityCoefficients:
    """Sensitivity coefficients of the 0-1 splitting at a working point.

    Evaluates the Hamiltonian at lambda0, lambda0 +- delta and lambda0 +-
    delta/2, takes central differences for the first and second derivative
    of omega_q(lambda) and for dH/dlambda, and cross-checks each derivative
    between the two step sizes (disagreement beyond 1 percent raises
    ConvergenceError).  All five Hamiltonians must share one basis.
    """
    if delta <= 0.0:
        raise ConfigError(f"delta must be positive, got {delta}")
    h0 = h_of_lambda(lambda0)
    hp, hm = h_of_lambda(lambda0 + delta), h_of_lambda(lambda0 - delta)
    hp2, hm2 = h_of_lambda(lambda0 + delta / 2.0), h_of_lambda(lambda0 - delta / 2.0)
    for other in (hp, hm, hp2, hm2):
        if other.space.dims != h0.space.dims:
            raise ConfigError("h_of_lambda must return operators on one fixed space")

    evals, evecs = np.linalg.eigh(h0.matrix)
    omega_q = float(evals[1] - evals[0])
    wp, wm = _splitting(hp), _splitting(hm)
    wp2, wm2 = _splitting(hp2), _splitting(hm2)
    w0 = omega_q

    e_scale = 1e-14 * max(1.0, float(np.abs(evals).max()))
    d_z = (wp - wm) / (2.0 * delta)
    d_z_half = (wp2 - wm2) / delta
    _richardson_guard(d_z, d_z_half, 10.0 * e_scale / (delta / 2.0), "d omega_q / d lambda")

    d2 = (wp - 2.0 * w0 + wm) / delta ** 2
    d2_half = (wp2 - 2.0 * w0 + wm2) / (delta / 2.0) ** 2
    _richardson_guard(d2, d2_half, 40.0 * e_scale / (delta / 2.0) ** 2, "d2 omega_q / d lambda2")

    dh = (hp.matrix - hm.matrix) / (2.0 * delta)
    dh_half = (hp2.matrix - hm2.matrix) / delta
    v0, v1 = evecs[:, 0], evecs[:, 1]
    d_perp = 2.0 * abs(v1.conj() @ (dh @ v0))
    d_perp_half = 2.0 * abs(v1.conj() @ (dh_half @ v0))
    _richardson_guard(d_perp, d_perp_half, 10.0 * e_scale / (delta / 2.0), "transverse coefficient")

    d_z = float(d_z_half)
    d2 = float(d2_half)
    d_perp = float(d_perp_half)
    d2_z = d2 - d_perp ** 2 / omega_q if omega_q != 0.0 else float("nan")
    return SensitivityCoefficients(
        lambda_name=lambda_name,
        omega_q=omega_q,
        d_z=d_z,
        d2_omega=d2,
        d2_z=float(d2_z),
        d_perp=d_perp,
    )


def circuit_sensitivity(params, lambda_name: str, delta: float, builder, **builder_kwargs):
    """Sensitivity of a circuit's splitting to one CircuitParams field.

    `builder` maps (CircuitParams, **builder_kwargs) to an Operator, e.g.
    `cpb_hamiltonian` with ncut or `fluxonium_hamiltonian` with its grid.
    """
    from dataclasses import replace

    if not hasattr(params, lambda_name):
        raise ConfigError(f"CircuitParams has no field {lambda_name!r}")
    base = float(getattr(params, lambda_name))

    def h_of_lambda(lam: float) -> Operator:
        return builder(replace(params, **{lambda_name: lam}), **builder_kwargs)

    return sensitivity(h_of_lambda, base, delta, lambda_name=lambda_name)


@dataclass(frozen=True)
class RateResult:
    """Golden-rule decoherence rates and the derived times."""

    gamma1: float
    gamma_phi: float
    gamma2: float
    t1: float
    t2: float


def golden_rule_rates(
    coeffs: SensitivityCoefficients,
    spectrum: NoiseSpectrum,
    omega_q: float | None = None,
) -> RateResult:
    """Weak-coupling rates from sensitivity coefficients and a spectrum.

    Gamma_1 = pi d_perp^2 S(omega_q), Gamma_phi = pi d_z^2 S(0),
    Gamma_2 = Gamma_phi + Gamma_1 / 2.  The spectrum here is the spectral
    density of the control-parameter fluctuations in the 1/(2 pi)
    convention (see the module docstring).

    A spectrum singular at zero frequency combined with a non-vanishing
    longitudinal coefficient has no white-noise dephasing rate; that case
    raises SingularSpectrumError and calls for the driven filter-function
    rates or the memory-kernel solver instead.
    """
    wq = float(coeffs.omega_q if omega_q is None else omega_q)
    if wq <= 0.0:
        raise ConfigError(f"qubit frequency must be positive, got {wq}")
    d_z_zero_tol = 1e-9 * max(1.0, wq)
    gamma1 = np.pi * coeffs.d_perp ** 2 * float(spectrum(wq))
    if abs(coeffs.d_z) <= d_z_zero_tol:
        gamma_phi = 0.0
    else:
        if spectrum.singular_at_zero:
            raise SingularSpectrumError(
                "spectrum diverges at zero frequency while the longitudinal coefficient "
                f"d_z = {coeffs.d_z:.3g} is finite; a white-noise dephasing rate does not "
                "exist here - use the driven filter-function rates or the memory-kernel solver"
            )
        gamma_phi = np.pi * coeffs.d_z ** 2 * float(spectrum(0.0))
    gamma2 = gamma_phi + gamma1 / 2.0
    t1 = float("inf") if gamma1 == 0.0 else 1.0 / gamma1
    t2 = float("inf") if gamma2 == 0.0 else 1.0 / gamma2
    return RateResult(
        gamma1=float(gamma1),
        gamma_phi=float(gamma_phi),
        gamma2=float(gamma2),
        t1=t1,
        t2=t2,
    )
