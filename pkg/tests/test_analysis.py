"""Bloch-vector helpers and decay-curve fitting."""

import numpy as np
import pytest

from sqsim.analysis import (
    FitResult,
    bloch_vector,
    fit_T1,
    fit_T2_ramsey,
    trace_distance,
)
from sqsim.core import DensityMatrix, Ket, basis_ket, qubit_space
from sqsim.errors import ConfigError, FitError


def test_bloch_vector_cardinal_states():
    g = basis_ket(qubit_space(), 0).dm()
    assert bloch_vector(g) == pytest.approx((0.0, 0.0, -1.0))
    e = basis_ket(qubit_space(), 1).dm()
    assert bloch_vector(e) == pytest.approx((0.0, 0.0, 1.0))
    plus = Ket(np.array([1.0, 1.0]) / np.sqrt(2), qubit_space()).dm()
    assert bloch_vector(plus) == pytest.approx((1.0, 0.0, 0.0))


def test_trace_distance_extremes():
    g = basis_ket(qubit_space(), 0).dm()
    e = basis_ket(qubit_space(), 1).dm()
    assert trace_distance(g, g) == pytest.approx(0.0, abs=1e-14)
    assert trace_distance(g, e) == pytest.approx(1.0)
    mixed = DensityMatrix(0.5 * np.eye(2), qubit_space())
    assert trace_distance(g, mixed) == pytest.approx(0.5)


def test_fit_t1_recovers_rate():
    rng = np.random.default_rng(51)
    t = np.linspace(0.0, 5.0, 60)
    rate = 0.8
    clean = np.exp(-rate * t)
    noisy = np.clip(clean + 0.004 * rng.standard_normal(t.size), 0.0, 1.0)
    fit = fit_T1(t, noisy)
    assert fit.rate == pytest.approx(rate, rel=0.02)
    assert fit.time_constant == pytest.approx(1.0 / rate, rel=0.02)
    assert fit.rms_residual < 0.01
    assert np.all(np.asarray(fit.covariance_diag) >= 0.0)


def test_fit_t1_with_offset():
    t = np.linspace(0.0, 8.0, 80)
    curve = 0.15 + 0.7 * np.exp(-0.5 * t)
    fit = fit_T1(t, curve)
    assert fit.rate == pytest.approx(0.5, rel=1e-4)
    assert fit.offset == pytest.approx(0.15, abs=1e-4)
    assert fit.amplitude == pytest.approx(0.7, rel=1e-4)


def test_fit_t1_input_validation():
    t = np.linspace(0.0, 1.0, 6)
    with pytest.raises(ConfigError):
        fit_T1(t, np.exp(-t))  # too few samples
    t = np.linspace(0.0, 1.0, 20)
    with pytest.raises(ConfigError):
        fit_T1(t, 1.5 * np.exp(-t))  # populations above one


def test_fit_ramsey_recovers_all_parameters():
    rng = np.random.default_rng(53)
    t = np.linspace(0.0, 10.0, 400)
    rate, delta, phi = 0.35, 2.1, 0.4
    clean = 0.9 * np.exp(-rate * t) * np.cos(delta * t + phi)
    noisy = clean + 0.01 * rng.standard_normal(t.size)
    fit = fit_T2_ramsey(t, noisy)
    assert fit.rate == pytest.approx(rate, rel=0.03)
    assert fit.frequency == pytest.approx(delta, rel=0.01)
    assert fit.amplitude == pytest.approx(0.9, rel=0.05)
    assert np.cos(fit.phase - phi) == pytest.approx(1.0, abs=1e-3)


def test_fit_ramsey_sign_folding():
    # a negative amplitude must fold into amplitude > 0 with a pi shift
    t = np.linspace(0.0, 6.0, 300)
    y = -0.8 * np.exp(-0.4 * t) * np.cos(1.7 * t)
    fit = fit_T2_ramsey(t, y)
    assert fit.amplitude > 0.0
    assert fit.frequency > 0.0
    recon = (fit.amplitude * np.exp(-fit.rate * t)
             * np.cos(fit.frequency * t + fit.phase) + fit.offset)
    assert np.abs(recon - y).max() < 1e-6


def test_fit_ramsey_zero_detuning_branch():
    # no oscillation at all: falls back to a plain exponential envelope
    t = np.linspace(0.0, 6.0, 200)
    y = 0.6 * np.exp(-0.5 * t)
    fit = fit_T2_ramsey(t, y)
    assert fit.rate == pytest.approx(0.5, rel=0.02)
    assert fit.frequency == pytest.approx(0.0, abs=0.05)


def test_fit_t1_rejects_non_decaying_data():
    t = np.linspace(0.0, 5.0, 40)
    with pytest.raises(FitError):
        fit_T1(t, np.full(t.size, 0.4))  # constant, nothing to fit
    with pytest.raises(FitError):
        fit_T1(t, 1.0 - np.exp(-t))  # rising, not a decay


def test_fit_ramsey_needs_enough_samples():
    t = np.linspace(0.0, 5.0, 10)
    with pytest.raises(ConfigError):
        fit_T2_ramsey(t, np.cos(t))


def test_fit_result_rejects_bad_fields():
    with pytest.raises(FitError):
        FitResult(rate=-1.0, amplitude=1.0, offset=0.0, frequency=0.0,
                  phase=0.0, rms_residual=0.1, covariance_diag=(0.0,))
    with pytest.raises(FitError):
        FitResult(rate=1.0, amplitude=1.0, offset=0.0, frequency=0.0,
                  phase=0.0, rms_residual=float("nan"), covariance_diag=(0.0,))
