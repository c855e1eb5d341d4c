"""Diffusive unravelings: Wiener paths, SSE/SME steppers, ensembles."""

import numpy as np
import pytest

from sqsim.core import (
    Ket,
    Operator,
    basis_ket,
    propagate_unitary,
    qubit_space,
    sigma_x,
    sigma_z,
)
from sqsim.errors import ConfigError
from sqsim.stochastic import (
    WienerPath,
    measurement_signal,
    sme_z_ensemble,
    solve_sme_z,
    solve_sse_markov,
    solve_sse_z,
    sse_markov_ensemble,
    sse_z_ensemble,
)


def plus_ket():
    return Ket(np.array([1.0, 1.0]) / np.sqrt(2.0), qubit_space())


def test_wiener_path_statistics():
    h = 0.01
    path = WienerPath.generate(np.random.default_rng(2), 20000, 1, h)
    inc = path.increments[:, 0]
    assert inc.mean() == pytest.approx(0.0, abs=4 * np.sqrt(h / 20000))
    assert inc.var() == pytest.approx(h, rel=0.05)


def test_complex_wiener_quadratures():
    h = 0.02
    path = WienerPath.generate(np.random.default_rng(3), 20000, 1, h,
                               complex_increments=True)
    inc = path.increments[:, 0]
    assert inc.real.var() == pytest.approx(h / 2.0, rel=0.05)
    assert inc.imag.var() == pytest.approx(h / 2.0, rel=0.05)
    # quadratures uncorrelated
    corr = np.mean(inc.real * inc.imag) / (h / 2.0)
    assert abs(corr) < 0.05


def test_coarsened_path_sums_pairs():
    path = WienerPath.generate(np.random.default_rng(4), 10, 2, 0.1)
    coarse = path.coarsened()
    assert coarse.step == pytest.approx(0.2)
    assert coarse.increments.shape == (5, 2)
    assert np.allclose(coarse.increments[0],
                       path.increments[0] + path.increments[1])
    # total displacement is preserved
    assert np.allclose(coarse.increments.sum(axis=0),
                       path.increments.sum(axis=0))


def test_sse_markov_no_noise_is_schroedinger():
    h = Operator(0.5 * 4.0 * sigma_z().matrix + 0.3 * sigma_x().matrix,
                 qubit_space())
    times = np.linspace(0.0, 1.0, 2001)
    traj = solve_sse_markov(h, [], basis_ket(qubit_space(), 1), times,
                            scheme="heun", rng=np.random.default_rng(0))
    ref = propagate_unitary(h, times[-1], basis_ket(qubit_space(), 1))
    assert np.abs(traj.kets[-1] - ref.amplitudes).max() < 1e-6


def test_sse_markov_mean_norm_squared_is_martingale():
    # for the linear SSE, E[ |psi|^2 ] = 1 at all times
    h = Operator(0.5 * 2.0 * sigma_z().matrix, qubit_space())
    c = Operator(np.array([[0.0, 0.6], [0.0, 0.0]]), qubit_space())
    times = np.linspace(0.0, 1.0, 201)
    res = sse_markov_ensemble(h, [c], basis_ket(qubit_space(), 1), times,
                              n_paths=400, master_seed=9)
    band = 4.0 * res.se_norm_sq.max() + 0.02
    assert np.abs(res.mean_norm_sq - 1.0).max() < band


def test_sse_markov_ensemble_mean_matches_master_equation():
    gamma = 0.8
    h = Operator(0.5 * 3.0 * sigma_z().matrix, qubit_space())
    c = Operator(np.sqrt(gamma) * np.array([[0.0, 1.0], [0.0, 0.0]]),
                 qubit_space())
    times = np.linspace(0.0, 1.5, 301)
    res = sse_markov_ensemble(h, [c], basis_ket(qubit_space(), 1), times,
                              n_paths=600, master_seed=21)
    pe = res.mean_matrices[:, 1, 1].real
    assert np.abs(pe - np.exp(-gamma * times)).max() < 0.08


def test_sse_z_stays_normalized():
    times = np.linspace(0.0, 2.0, 801)
    traj, record = solve_sse_z(1.0, plus_ket(), times,
                               rng=np.random.default_rng(11))
    norms = np.linalg.norm(traj.kets, axis=1)
    assert np.abs(norms - 1.0).max() < 1e-12
    assert record.values.shape == (times.size - 1,)
    assert np.all(np.isfinite(record.values))


def test_sse_z_collapses_to_pole():
    times = np.linspace(0.0, 8.0, 1601)
    finals = []
    for p in range(12):
        traj, _ = solve_sse_z(1.0, plus_ket(), times,
                              rng=np.random.default_rng(100 + p))
        ez = (np.abs(traj.kets[-1]) ** 2 * np.array([-1.0, 1.0])).sum()
        finals.append(ez)
    assert np.all(np.abs(finals) > 0.999)


def test_sme_z_trace_and_positivity_exact():
    times = np.linspace(0.0, 2.0, 801)
    states, record = solve_sme_z(1.0, plus_ket().dm(), times,
                                 rng=np.random.default_rng(13))
    for s in states[::80]:
        assert abs(np.trace(s.matrix) - 1.0) < 1e-14
        assert s.min_eigenvalue() > -1e-12


def test_sme_z_preserves_purity_of_pure_states():
    times = np.linspace(0.0, 1.0, 801)
    states, _ = solve_sme_z(1.0, plus_ket().dm(), times,
                            rng=np.random.default_rng(17))
    purity = np.array([s.purity() for s in states])
    assert np.abs(purity - 1.0).max() < 1e-12


def test_sse_sme_agree_on_shared_path():
    k = 1.0
    times = np.linspace(0.0, 1.0, 1601)
    h = float(times[1] - times[0])
    wiener = WienerPath.generate(np.random.default_rng(19), times.size - 1,
                                 1, h)
    traj, rec_a = solve_sse_z(k, plus_ket(), times, wiener=wiener)
    states, rec_b = solve_sme_z(k, plus_ket().dm(), times, wiener=wiener)
    proj = np.outer(traj.kets[-1], traj.kets[-1].conj())
    dist = 0.5 * np.abs(np.linalg.eigvalsh(proj - states[-1].matrix)).sum()
    assert dist < 0.05
    # the shared dW part of the record (magnitude ~1/sqrt(4k) h) cancels
    # exactly; only the per-scheme <sz> difference survives
    assert np.abs(rec_a.values - rec_b.values).max() < 0.05
    assert np.abs(rec_a.values).max() > 1.0


def test_sme_mean_dephasing_rate():
    k = 0.5
    times = np.linspace(0.0, 1.0, 401)
    res = sme_z_ensemble(k, plus_ket().dm(), times, n_paths=300,
                         master_seed=31)
    ref = 0.5 * np.exp(-2.0 * k * times)
    band = 4.0 * res.se_abs_coherence + 1e-3
    assert np.all(np.abs(res.mean_abs_coherence - ref) < band)


def test_sse_z_ensemble_mean_sz_martingale():
    times = np.linspace(0.0, 1.0, 401)
    res = sse_z_ensemble(1.0, plus_ket(), times, n_paths=400, master_seed=37)
    band = 4.0 * res.se_sz + 0.01
    assert np.all(np.abs(res.mean_sz - 0.0) < band)


def test_ensembles_reproducible():
    times = np.linspace(0.0, 0.5, 201)
    a = sme_z_ensemble(1.0, plus_ket().dm(), times, 50, master_seed=41)
    b = sme_z_ensemble(1.0, plus_ket().dm(), times, 50, master_seed=41)
    assert np.array_equal(a.mean_sz, b.mean_sz)
    assert np.array_equal(a.mean_abs_coherence, b.mean_abs_coherence)


def test_measurement_signal_centering():
    rng = np.random.default_rng(43)
    dt = 0.01
    k = 2.0
    vals = np.array([measurement_signal(0.3, k, dt, rng)
                     for _ in range(20000)])
    assert vals.mean() == pytest.approx(0.3, abs=4.0 / np.sqrt(4 * k * dt * 20000))
    assert vals.var() == pytest.approx(1.0 / (4 * k * dt), rel=0.05)


def test_seed_validation():
    times = np.linspace(0.0, 1.0, 101)
    with pytest.raises(ConfigError):
        sse_z_ensemble(1.0, plus_ket(), times, 10, master_seed=-1)
    with pytest.raises(ConfigError):
        solve_sse_z(0.0, plus_ket(), times, rng=np.random.default_rng(0))


def test_nonuniform_grid_rejected():
    with pytest.raises(ConfigError):
        solve_sse_z(1.0, plus_ket(), np.array([0.0, 0.1, 0.3]),
                    rng=np.random.default_rng(0))
