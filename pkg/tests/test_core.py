"""States, operators, vectorization, and the Liouvillian generator."""

import numpy as np
import pytest
from scipy.linalg import expm

from sqsim.core import (
    DensityMatrix,
    HilbertSpace,
    Ket,
    Operator,
    basis_ket,
    create,
    destroy,
    expectation,
    expm_multiply,
    identity,
    liouvillian,
    number_op,
    partial_trace,
    propagate_unitary,
    qubit_space,
    sigma_minus,
    sigma_plus,
    sigma_x,
    sigma_y,
    sigma_z,
    tensor,
    unvec,
    vec,
)


def test_pauli_algebra():
    sx, sy, sz = sigma_x().matrix, sigma_y().matrix, sigma_z().matrix
    assert np.allclose(sx @ sy - sy @ sx, 2j * sz)
    assert np.allclose(sx @ sx, np.eye(2))
    assert np.allclose(sy @ sy, np.eye(2))
    # ground state is index 0 and sits at sz = -1
    assert np.allclose(np.diag(sz), [-1.0, 1.0])


def test_ladder_conventions():
    # sigma_minus maps |e> -> |g>, i.e. acts on the excited amplitude
    g = basis_ket(qubit_space(), 0)
    e = basis_ket(qubit_space(), 1)
    lowered = sigma_minus().matrix @ e.amplitudes
    assert np.allclose(lowered, g.amplitudes)
    assert np.allclose(sigma_minus().matrix @ g.amplitudes, 0.0)
    assert np.allclose(sigma_plus().matrix, sigma_minus().dag().matrix)
    # oscillator ladder: a|n> = sqrt(n)|n-1>
    a = destroy(4).matrix
    n = number_op(4).matrix
    assert np.allclose(a.conj().T @ a, n)
    assert np.allclose(create(4).matrix, a.conj().T)


def test_ket_normalization_and_dm():
    space = qubit_space()
    psi = Ket(np.array([3.0, 4.0j]), space).normalized()
    assert psi.norm() == pytest.approx(1.0)
    rho = psi.dm()
    assert rho.matrix[1, 1] == pytest.approx(0.64)
    assert rho.purity() == pytest.approx(1.0)
    # excited-state population is the (1, 1) entry
    e = basis_ket(space, 1).dm()
    assert e.matrix[1, 1] == pytest.approx(1.0)


def test_density_matrix_validation():
    space = qubit_space()
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[0.7, 0.0], [0.0, 0.7]]), space)
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[1.2, 0.0], [0.0, -0.2]]), space)
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[0.5, 0.5], [0.1, 0.5]]), space)


def test_vec_column_stacking():
    rng = np.random.default_rng(7)
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    v = vec(m)
    # column stacking: the first column comes first
    assert np.allclose(v[:3], m[:, 0])
    assert np.allclose(unvec(v, 3), m)


def test_vec_kron_identity():
    # vec(A rho B) = (B^T kron A) vec(rho)
    rng = np.random.default_rng(11)
    a, rho, b = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
                 for _ in range(3))
    lhs = vec(a @ rho @ b)
    rhs = np.kron(b.T, a) @ vec(rho)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_liouvillian_matches_hand_built_rhs():
    rng = np.random.default_rng(3)
    space = HilbertSpace((3,))
    hm = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    hm = 0.5 * (hm + hm.conj().T)
    h = Operator(hm, space)
    lm = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rate = 0.7
    gen = liouvillian(h, [(Operator(lm, space), rate)])
    rho = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho = rho @ rho.conj().T
    rho /= np.trace(rho)
    expected = -1j * (hm @ rho - rho @ hm) + rate * (
        lm @ rho @ lm.conj().T
        - 0.5 * (lm.conj().T @ lm @ rho + rho @ lm.conj().T @ lm))
    got = unvec(gen.matrix @ vec(rho), 3)
    assert np.allclose(got, expected, atol=1e-12)


def test_liouvillian_annihilates_trace():
    rng = np.random.default_rng(5)
    space = HilbertSpace((4,))
    hm = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h = Operator(0.5 * (hm + hm.conj().T), space)
    chans = [(Operator(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)),
                       space), r) for r in (0.3, 1.1)]
    gen = liouvillian(h, chans)
    # tr(L rho) = 0 for every rho  <=>  vec(I)^dag L = 0
    tr_row = vec(np.eye(4)).conj() @ gen.matrix
    assert np.abs(tr_row).max() < 1e-12


def test_propagate_unitary_matches_expm():
    space = qubit_space()
    h = Operator(0.5 * 3.0 * sigma_z().matrix + 0.4 * sigma_x().matrix, space)
    psi0 = basis_ket(space, 1)
    t = 1.7
    psi = propagate_unitary(h, t, psi0)
    ref = expm(-1j * h.matrix * t) @ psi0.amplitudes
    assert np.allclose(psi.amplitudes, ref, atol=1e-12)
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)


def test_expm_multiply_matches_dense_expm():
    rng = np.random.default_rng(13)
    space = qubit_space()
    hm = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    h = Operator(0.5 * (hm + hm.conj().T), space)
    gen = liouvillian(h, [(sigma_minus(), 0.8)])
    t = 2.3
    assert np.allclose(expm_multiply(gen, t), expm(gen.matrix * t), atol=1e-10)


def test_expectation_ket_vs_dm():
    psi = Ket(np.array([1.0, 1.0j]) / np.sqrt(2.0), qubit_space())
    for op in (sigma_x(), sigma_y(), sigma_z()):
        assert expectation(op, psi) == pytest.approx(
            expectation(op, psi.dm()), abs=1e-12)
    # ground-first basis with sz = diag(-1, +1) puts (|g> + i|e>)/sqrt2 at -y
    assert expectation(sigma_y(), psi) == pytest.approx(-1.0)


def test_ground_state_bloch_convention():
    g = basis_ket(qubit_space(), 0)
    assert expectation(sigma_z(), g) == pytest.approx(-1.0)


def test_partial_trace_of_product_state():
    rng = np.random.default_rng(17)

    def random_dm(dim):
        m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        m = m @ m.conj().T
        return m / np.trace(m)

    ma, mb = random_dm(2), random_dm(3)
    joint = DensityMatrix(np.kron(ma, mb), HilbertSpace((2, 3)))
    back_a = partial_trace(joint, keep=[0])
    back_b = partial_trace(joint, keep=[1])
    assert np.allclose(back_a.matrix, ma, atol=1e-12)
    assert np.allclose(back_b.matrix, mb, atol=1e-12)


def test_tensor_operator_shapes():
    op = tensor(sigma_z(), identity(HilbertSpace((3,))))
    assert op.matrix.shape == (6, 6)
    assert op.is_hermitian()


def test_operator_space_mismatch_rejected():
    h = Operator(np.eye(3), HilbertSpace((3,)))
    with pytest.raises(ValueError):
        liouvillian(h, [(sigma_minus(), 1.0)])
