"""Memory-kernel master equation against its Laplace-domain solution."""

import numpy as np
import pytest

from sqsim.core import (
    Ket,
    Operator,
    liouvillian,
    qubit_space,
    sigma_minus,
    sigma_z,
)
from sqsim.errors import ConfigError
from sqsim.lindblad import LindbladModel, solve_lindblad
from sqsim.nonmarkov import MemoryKernel, PMMEModel, nonmarkov_dephasing, solve_pmme


def plus_state():
    return Ket(np.array([1.0, 1.0]) / np.sqrt(2.0), qubit_space()).dm()


def dephasing_model(kernel, gamma_z=1.0):
    h = Operator(np.zeros((2, 2)), qubit_space())
    return PMMEModel(l0=liouvillian(h), l1=nonmarkov_dephasing(gamma_z),
                     kernel=kernel)


def coherence_oracle(times, gamma, gamma_z, normalized):
    """Two-pole inverse Laplace transform of the dephasing coherence.

    With L0 = 0 the coherence obeys
        c'(t) = -G int_0^t K(t') e^{-G t'} c(t - t') dt',  G = 2 gamma_z,
    so in Laplace space c(s) = c0 (s + g') / (s^2 + g' s + m G) where
    g' = gamma + G and m is the kernel mass scale (1 for the bare
    exponential, gamma for the normalized one).
    """
    big_g = 2.0 * gamma_z
    gp = gamma + big_g
    m = gamma if normalized else 1.0
    disc = np.sqrt(complex(gp * gp - 4.0 * m * big_g))
    s1 = 0.5 * (-gp + disc)
    s2 = 0.5 * (-gp - disc)
    c = ((s1 + gp) * np.exp(s1 * times) - (s2 + gp) * np.exp(s2 * times))
    return (c / (s1 - s2)).real


@pytest.mark.parametrize("normalized", [False, True])
def test_dephasing_matches_laplace_oracle(normalized):
    gamma, gamma_z = 6.0, 1.0
    kernel = (MemoryKernel.normalized_exponential(gamma) if normalized
              else MemoryKernel.exponential(gamma))
    model = dephasing_model(kernel, gamma_z)
    times = np.linspace(0.0, 2.0, 2001)
    res = solve_pmme(model, plus_state(), times, store_states=True)
    coh = np.array([s.matrix[0, 1].real for s in res.states])
    ref = 0.5 * coherence_oracle(times, gamma, gamma_z, normalized)
    assert np.abs(coh - ref).max() < 5e-5


def test_memoryless_branch_is_markovian():
    # L1 = 0 reduces to a plain Lindblad evolution under L0
    h = Operator(0.5 * 3.0 * sigma_z().matrix, qubit_space())
    l0 = liouvillian(h, [(sigma_minus(), 0.8)])
    model = PMMEModel(l0=l0, l1=nonmarkov_dephasing(0.0),
                      kernel=MemoryKernel.exponential(10.0))
    from sqsim.core import basis_ket
    rho0 = basis_ket(qubit_space(), 1).dm()
    times = np.linspace(0.0, 2.0, 801)
    res = solve_pmme(model, rho0, times, store_states=True)
    ref = solve_lindblad(LindbladModel(hamiltonian=h,
                                       channels=((sigma_minus(), 0.8),)),
                         rho0, times, method="expm")
    worst = max(np.abs(a.matrix - b.matrix).max()
                for a, b in zip(res.states, ref.states))
    assert worst < 1e-6


def test_large_gamma_approaches_markovian():
    # normalized kernel: gamma -> inf recovers Lindblad(L0 + L1)
    gamma_z = 1.0
    times = np.linspace(0.0, 1.0, 1601)
    devs = []
    for gamma in (40.0, 160.0):
        model = dephasing_model(MemoryKernel.normalized_exponential(gamma),
                                gamma_z)
        res = solve_pmme(model, plus_state(), times, store_states=True)
        coh = np.array([abs(s.matrix[0, 1]) for s in res.states])
        ref = 0.5 * np.exp(-2.0 * gamma_z * times)
        devs.append(np.abs(coh - ref).max())
    assert devs[1] < devs[0]
    assert devs[1] < 0.4 * devs[0]  # ~1/gamma scaling


def test_trace_and_hermiticity_invariants():
    model = dephasing_model(MemoryKernel.exponential(5.0), 2.0)
    times = np.linspace(0.0, 3.0, 1201)
    res = solve_pmme(model, plus_state(), times, store_states=True)
    for s in res.states[:: len(res.states) // 10]:
        assert abs(np.trace(s.matrix) - 1.0) < 1e-6
        assert np.abs(s.matrix - s.matrix.conj().T).max() < 1e-8


def test_tabulated_kernel_matches_exponential():
    gamma = 4.0
    t_tab = np.linspace(0.0, 5.0, 5001)
    tab = MemoryKernel.tabulated(t_tab, np.exp(-gamma * t_tab))
    times = np.linspace(0.0, 1.5, 1501)
    res_tab = solve_pmme(dephasing_model(tab), plus_state(), times,
                         store_states=True)
    res_exp = solve_pmme(dephasing_model(MemoryKernel.exponential(gamma)),
                         plus_state(), times, store_states=True)
    worst = max(np.abs(a.matrix - b.matrix).max()
                for a, b in zip(res_tab.states, res_exp.states))
    assert worst < 1e-6


def test_kernel_validation():
    with pytest.raises(ConfigError):
        MemoryKernel.exponential(0.0)
    with pytest.raises(ConfigError):
        MemoryKernel.tabulated([0.0, 1.0, 0.5], [1.0, 1.0, 1.0])
    with pytest.raises(ConfigError):
        MemoryKernel.tabulated([0.0], [1.0])


def test_rejects_nonuniform_grid():
    model = dephasing_model(MemoryKernel.exponential(5.0))
    with pytest.raises(ConfigError):
        solve_pmme(model, plus_state(), np.array([0.0, 0.1, 0.3]))


def test_rejects_trace_growing_l1():
    # a superoperator that does not annihilate the trace is refused
    from sqsim.core import Superoperator
    bad = Superoperator(np.eye(4), qubit_space())
    h = Operator(np.zeros((2, 2)), qubit_space())
    with pytest.raises(ConfigError):
        PMMEModel(l0=liouvillian(h), l1=bad,
                  kernel=MemoryKernel.exponential(1.0))
