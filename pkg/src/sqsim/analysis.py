"""Observables and decay-curve fitting for extracting T1 and T2.

The fitters are damped least squares (scipy's Levenberg-Marquardt style
trust-region) with analytic Jacobians.  T1 data is seeded by a log-linear
regression on the offset-subtracted tail; Ramsey data by the dominant
discrete-Fourier peak.  Both raise FitError with diagnostics instead of
returning garbage when the data carries no decay.
"""

from __future__ import annotations

import dataclasses
from typing import Optional

import numpy as np
from scipy.optimize import least_squares

from .core import DensityMatrix, sigma_x, sigma_y, sigma_z
from .errors import ConfigError, FitError

MIN_T1_SAMPLES = 8
MIN_RAMSEY_SAMPLES = 16


def bloch_vector(rho: DensityMatrix) -> tuple:
    """(x, y, z) components Tr(sigma_i rho); ground state maps to (0, 0, -1)."""
    if rho.space.total != 2:
        raise ConfigError("bloch_vector needs a two-level state")
    m = rho.matrix
    x = float(np.trace(sigma_x().matrix @ m).real)
    y = float(np.trace(sigma_y().matrix @ m).real)
    z = float(np.trace(sigma_z().matrix @ m).real)
    return (x, y, z)


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Half the sum of singular values of rho - sigma."""
    if rho.space != sigma.space:
        raise ConfigError("states live on different spaces")
    diff = rho.matrix - sigma.matrix
    return float(0.5 * np.abs(np.linalg.svd(diff, compute_uv=False)).sum())


@dataclasses.dataclass(frozen=True)
class FitResult:
    """Fitted decay parameters; frequency is None for plain T1 decay."""

    rate: float
    amplitude: float
    offset: float
    frequency: Optional[float]
    phase: Optional[float]
    rms_residual: float
    covariance_diag: np.ndarray

    def __post_init__(self):
        if not np.isfinite(self.rms_residual):
            raise FitError("non-finite residual")
        if self.rate < 0:
            raise FitError("negative decay rate escaped the fitter")

    @property
    def time_constant(self) -> float:
        return 1.0 / self.rate if self.rate > 0 else np.inf


def _validate_series(times, values, min_samples, what):
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != y.shape:
        raise ConfigError(f"{what}: times and values must be matching 1-d arrays")
    if t.size < min_samples:
        raise ConfigError(f"{what}: need at least {min_samples} samples")
    if np.any(np.diff(t) <= 0):
        raise ConfigError(f"{what}: times must be strictly increasing")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(y))):
        raise ConfigError(f"{what}: data contains non-finite entries")
    return t, y


def _covariance_diag(res, n_data):
    # Gauss-Newton covariance from the final Jacobian; dof-scaled residual
    jac = res.jac
    dof = max(n_data - jac.shape[1], 1)
    s_sq = 2.0 * res.cost / dof
    jtj = jac.T @ jac
    try:
        cov = np.linalg.inv(jtj) * s_sq
        return np.abs(np.diag(cov))
    except np.linalg.LinAlgError:
        return np.full(jac.shape[1], np.nan)


def fit_T1(times, excited_population) -> FitResult:
    """Fit A exp(-rate t) + c to a population-decay curve."""
    t, y = _validate_series(times, excited_population, MIN_T1_SAMPLES, "fit_T1")
    if np.any((y < -1e-9) | (y > 1 + 1e-9)):
        raise ConfigError("fit_T1: populations must lie in [0, 1]")

    c0 = float(y[-min(4, y.size):].mean())
    resid0 = y - c0
    head = float(resid0[: max(3, y.size // 8)].mean())
    if head <= 1e-12 or (y[0] - y[-1]) <= 1e-12:
        raise FitError(
            "fit_T1: data does not decay "
            f"(first {y[0]:.3g}, last {y[-1]:.3g}, offset {c0:.3g})"
        )
    # log-linear seed on the part of the tail still above the offset
    mask = resid0 > 0.05 * head
    if mask.sum() >= 2:
        coef = np.polyfit(t[mask], np.log(resid0[mask]), 1)
        rate0 = max(-coef[0], 1e-12)
        amp0 = float(np.exp(coef[1]))
    else:
        rate0 = 1.0 / max(t[-1] - t[0], 1e-12)
        amp0 = head

    def model(p, tt):
        rate, amp, c = p
        return amp * np.exp(-rate * tt) + c

    def resid(p):
        return model(p, t) - y

    def jac(p):
        rate, amp, c = p
        e = np.exp(-rate * t)
        return np.stack([-amp * t * e, e, np.ones_like(t)], axis=1)

    sol = least_squares(resid, x0=[rate0, amp0, c0], jac=jac, method="lm",
                        xtol=1e-14, ftol=1e-14)
    rate, amp, c = sol.x
    if rate <= 0 or not sol.success:
        raise FitError(f"fit_T1: solver did not converge to a decay (rate {rate:.3g})")
    rms = float(np.sqrt(np.mean(sol.fun**2)))
    return FitResult(rate=float(rate), amplitude=float(amp), offset=float(c),
                     frequency=None, phase=None, rms_residual=rms,
                     covariance_diag=_covariance_diag(sol, t.size))


def _dft_peak(t, y):
    # dominant nonzero frequency of the detrended signal on a uniform grid
    n = t.size
    dt = (t[-1] - t[0]) / (n - 1)
    z = y - y.mean()
    spec = np.abs(np.fft.rfft(z * np.hanning(n)))
    freqs = 2.0 * np.pi * np.fft.rfftfreq(n, d=dt)
    if spec.size <= 1:
        return 0.0
    k = 1 + int(np.argmax(spec[1:]))
    return float(freqs[k])


def fit_T2_ramsey(times, sx_signal, detuning_hint: Optional[float] = None
                  ) -> FitResult:
    """Fit A exp(-rate t) cos(delta t + phi) + c to a Ramsey fringe.

    A vanishing fitted or seeded detuning falls back to the plain
    exponential-decay model (the cosine becomes degenerate with the
    amplitude).
    """
    t, y = _validate_series(times, sx_signal, MIN_RAMSEY_SAMPLES, "fit_T2_ramsey")
    delta0 = float(detuning_hint) if detuning_hint is not None else _dft_peak(t, y)
    span = t[-1] - t[0]

    if abs(delta0) * span < 0.5:
        # fewer than ~a twelfth of a cycle: the cosine is degenerate with the
        # amplitude, so fit a plain exponential instead
        c0 = float(y[-min(4, y.size):].mean())
        amp0 = float(y[0] - c0)
        if abs(amp0) < 1e-12:
            raise FitError("fit_T2_ramsey: no oscillation and no decay in the data")
        rate0 = 1.0 / max(span, 1e-12)

        def resid_exp(p):
            rate, amp, c = p
            return amp * np.exp(-rate * t) + c - y

        def jac_exp(p):
            rate, amp, c = p
            e = np.exp(-rate * t)
            return np.stack([-amp * t * e, e, np.ones_like(t)], axis=1)

        sol = least_squares(resid_exp, x0=[rate0, amp0, c0], jac=jac_exp,
                            method="lm", xtol=1e-14, ftol=1e-14)
        rate, amp, c = sol.x
        if not sol.success or rate <= 0:
            raise FitError("fit_T2_ramsey: no oscillation and no decay "
                           f"(degenerate fit rate {rate:.3g})")
        rms = float(np.sqrt(np.mean(sol.fun**2)))
        return FitResult(rate=float(rate), amplitude=float(amp), offset=float(c),
                         frequency=0.0, phase=0.0, rms_residual=rms,
                         covariance_diag=_covariance_diag(sol, t.size))

    c0 = float(y.mean())
    env = np.abs(y - c0)
    amp0 = float(np.percentile(env, 95)) or 1.0
    rate0 = 1.0 / max(span, 1e-12)

    def resid(p):
        rate, amp, delta, phi, c = p
        return amp * np.exp(-rate * t) * np.cos(delta * t + phi) + c - y

    def jac(p):
        rate, amp, delta, phi, c = p
        e = np.exp(-rate * t)
        cs = np.cos(delta * t + phi)
        sn = np.sin(delta * t + phi)
        return np.stack([-amp * t * e * cs, e * cs, -amp * e * t * sn,
                         -amp * e * sn, np.ones_like(t)], axis=1)

    sol = least_squares(resid, x0=[rate0, amp0, delta0, 0.0, c0], jac=jac,
                        method="lm", xtol=1e-14, ftol=1e-14)
    rate, amp, delta, phi, c = sol.x
    if not sol.success or rate < 0:
        raise FitError(f"fit_T2_ramsey: no decaying fringe found (rate {rate:.3g})")
    # fold the sign ambiguity (A, delta, phi) -> (-A, -delta, phi+pi)
    if amp < 0:
        amp, phi = -amp, phi + np.pi
    if delta < 0:
        delta, phi = -delta, -phi
    rms = float(np.sqrt(np.mean(sol.fun**2)))
    return FitResult(rate=float(rate), amplitude=float(amp), offset=float(c),
                     frequency=float(delta), phase=float(phi), rms_residual=rms,
                     covariance_diag=_covariance_diag(sol, t.size))
