"""Dense state and operator types plus the basic channel algebra.

Conventions used everywhere in this package:

* hbar = 1 and all frequencies are angular frequencies.
* Qubit basis ordering is (ground, excited) = (index 0, index 1), and
  sigma_z = |e><e| - |g><g|, so the ground state sits at the south pole
  of the Bloch sphere.
* Composite spaces are built with `tensor`, Kronecker products with the
  first factor varying slowest; `HilbertSpace.dims` records the factors.
* Superoperators act on column-stacked density matrices: vec(rho) stacks
  columns, so vec(A rho B) = (B^T kron A) vec(rho).

Everything is dense complex128.  The types are immutable: matrices are
copied on construction and marked read-only.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

import numpy as np
import scipy.linalg

__all__ = [
    "HilbertSpace",
    "Operator",
    "Ket",
    "DensityMatrix",
    "Superoperator",
    "tensor",
    "partial_trace",
    "liouvillian",
    "propagate_unitary",
    "expectation",
    "vec",
    "unvec",
    "sigma_x",
    "sigma_y",
    "sigma_z",
    "sigma_plus",
    "sigma_minus",
    "identity",
    "number_op",
    "destroy",
    "create",
    "basis_ket",
    "qubit_space",
]

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-9


def _frozen_complex(a, shape_kind) -> np.ndarray:
    arr = np.array(a, dtype=np.complex128, copy=True, order="C")
    if shape_kind == "matrix":
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    elif shape_kind == "vector":
        arr = arr.reshape(-1)
    if not np.all(np.isfinite(arr.view(np.float64))):
        raise ValueError("matrix entries must be finite")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class HilbertSpace:
    """Composite Hilbert space described by its tensor-factor dimensions."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) == 0 or any(d < 1 for d in dims):
            raise ValueError(f"dims must be a non-empty tuple of positive ints, got {self.dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))


def qubit_space() -> HilbertSpace:
    return HilbertSpace((2,))


def _check_same_space(a, b, what):
    if a.space.dims != b.space.dims:
        raise ValueError(f"{what}: spaces {a.space.dims} and {b.space.dims} differ")


@dataclass(frozen=True)
class Operator:
    """Linear operator on a HilbertSpace, stored as a dense matrix."""

    matrix: np.ndarray
    space: HilbertSpace

    def __post_init__(self):
        mat = _frozen_complex(self.matrix, "matrix")
        if mat.shape[0] != self.space.total:
            raise ValueError(
                f"matrix side {mat.shape[0]} does not match space dimension {self.space.total}"
            )
        object.__setattr__(self, "matrix", mat)

    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.space)

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        scale = max(1.0, float(np.abs(self.matrix).max()))
        return bool(np.abs(self.matrix - self.matrix.conj().T).max() <= tol * scale)

    def __add__(self, other: "Operator") -> "Operator":
        _check_same_space(self, other, "operator addition")
        return Operator(self.matrix + other.matrix, self.space)

    def __sub__(self, other: "Operator") -> "Operator":
        _check_same_space(self, other, "operator subtraction")
        return Operator(self.matrix - other.matrix, self.space)

    def __neg__(self) -> "Operator":
        return Operator(-self.matrix, self.space)

    def __mul__(self, c) -> "Operator":
        if not isinstance(c, numbers.Number):
            return NotImplemented
        return Operator(self.matrix * c, self.space)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, Operator):
            _check_same_space(self, other, "operator product")
            return Operator(self.matrix @ other.matrix, self.space)
        if isinstance(other, Ket):
            _check_same_space(self, other, "operator application")
            return Ket(self.matrix @ other.amplitudes, self.space)
        return NotImplemented


@dataclass(frozen=True)
class Ket:
    """Pure state vector.  The norm is reported, not enforced."""

    amplitudes: np.ndarray
    space: HilbertSpace

    def __post_init__(self):
        amp = _frozen_complex(self.amplitudes, "vector")
        if amp.shape[0] != self.space.total:
            raise ValueError(
                f"amplitude length {amp.shape[0]} does not match space dimension {self.space.total}"
            )
        object.__setattr__(self, "amplitudes", amp)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "Ket":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return Ket(self.amplitudes / n, self.space)

    def dm(self) -> "DensityMatrix":
        psi = self.normalized().amplitudes
        return DensityMatrix(np.outer(psi, psi.conj()), self.space)


@dataclass(frozen=True)
class DensityMatrix:
    """Density matrix, validated on construction.

    Tolerances: Hermitian within `herm_tol`, unit trace within `trace_tol`,
    eigenvalues above `-positivity_tol`.  Solvers that legitimately wander
    slightly outside the defaults (stochastic master equation steps) pass
    their documented looser tolerances explicitly.
    """

    matrix: np.ndarray
    space: HilbertSpace
    herm_tol: float = field(default=HERMITICITY_TOL, compare=False)
    trace_tol: float = field(default=TRACE_TOL, compare=False)
    positivity_tol: float = field(default=POSITIVITY_TOL, compare=False)

    def __post_init__(self):
        mat = _frozen_complex(self.matrix, "matrix")
        if mat.shape[0] != self.space.total:
            raise ValueError(
                f"matrix side {mat.shape[0]} does not match space dimension {self.space.total}"
            )
        scale = max(1.0, float(np.abs(mat).max()))
        herm_defect = float(np.abs(mat - mat.conj().T).max())
        if herm_defect > self.herm_tol * scale:
            raise ValueError(f"density matrix not Hermitian: defect {herm_defect:.3e}")
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > self.trace_tol:
            raise ValueError(f"density matrix trace {tr} deviates from 1 beyond {self.trace_tol:.1e}")
        evals = np.linalg.eigvalsh((mat + mat.conj().T) / 2.0)
        if evals.min() < -self.positivity_tol:
            raise ValueError(f"density matrix has negative eigenvalue {evals.min():.3e}")
        object.__setattr__(self, "matrix", mat)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh((self.matrix + self.matrix.conj().T) / 2.0).min())


@dataclass(frozen=True)
class Superoperator:
    """Linear map on vectorized density matrices (column stacking)."""

    matrix: np.ndarray
    space: HilbertSpace

    def __post_init__(self):
        mat = _frozen_complex(self.matrix, "matrix")
        if mat.shape[0] != self.space.total ** 2:
            raise ValueError(
                f"superoperator side {mat.shape[0]} must equal total dimension squared "
                f"{self.space.total ** 2}"
            )
        object.__setattr__(self, "matrix", mat)

    def __call__(self, rho: Union[DensityMatrix, np.ndarray]) -> np.ndarray:
        mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
        n = self.space.total
        return unvec(self.matrix @ vec(mat), n)


def vec(mat: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(mat).reshape(-1, order="F")


def unvec(v: np.ndarray, n: int) -> np.ndarray:
    return np.asarray(v).reshape((n, n), order="F")


# ---------------------------------------------------------------------------
# constructors for the ubiquitous small operators


def identity(space: HilbertSpace) -> Operator:
    return Operator(np.eye(space.total), space)


def sigma_x() -> Operator:
    return Operator(np.array([[0.0, 1.0], [1.0, 0.0]]), qubit_space())


def sigma_y() -> Operator:
    return Operator(np.array([[0.0, 1.0j], [-1.0j, 0.0]]), qubit_space())


def sigma_z() -> Operator:
    # |e><e| - |g><g| in (ground, excited) ordering
    return Operator(np.diag([-1.0, 1.0]), qubit_space())


def sigma_plus() -> Operator:
    return Operator(np.array([[0.0, 0.0], [1.0, 0.0]]), qubit_space())


def sigma_minus() -> Operator:
    return Operator(np.array([[0.0, 1.0], [0.0, 0.0]]), qubit_space())


def destroy(nmax: int) -> Operator:
    """Bosonic annihilation operator on a Fock space truncated at nmax photons."""
    if nmax < 1:
        raise ValueError("need at least two Fock levels")
    n = nmax + 1
    mat = np.diag(np.sqrt(np.arange(1, n, dtype=float)), k=1)
    return Operator(mat, HilbertSpace((n,)))


def create(nmax: int) -> Operator:
    return destroy(nmax).dag()


def number_op(nmax: int) -> Operator:
    return Operator(np.diag(np.arange(nmax + 1, dtype=float)), HilbertSpace((nmax + 1,)))


def basis_ket(space: HilbertSpace, index: int) -> Ket:
    amp = np.zeros(space.total)
    amp[index] = 1.0
    return Ket(amp, space)


# ---------------------------------------------------------------------------
# channel algebra


def tensor(*factors):
    """Kronecker product of Operators or of Kets; dims concatenate."""
    if len(factors) == 0:
        raise ValueError("tensor needs at least one factor")
    if all(isinstance(f, Operator) for f in factors):
        mat = factors[0].matrix
        dims = factors[0].space.dims
        for f in factors[1:]:
            mat = np.kron(mat, f.matrix)
            dims = dims + f.space.dims
        return Operator(mat, HilbertSpace(dims))
    if all(isinstance(f, Ket) for f in factors):
        amp = factors[0].amplitudes
        dims = factors[0].space.dims
        for f in factors[1:]:
            amp = np.kron(amp, f.amplitudes)
            dims = dims + f.space.dims
        return Ket(amp, HilbertSpace(dims))
    raise TypeError("tensor factors must be all Operators or all Kets")


def partial_trace(rho, keep: Sequence[int]):
    """Trace out every tensor factor not listed in `keep`.

    Parameters
    ----------
    rho : DensityMatrix or Operator
        State or operator on a composite space.
    keep : sequence of int
        Indices (into `space.dims`) of the factors to retain, in their
        original order.  Must be non-empty.

    Returns
    -------
    Same type as the input, on the reduced space.
    """
    keep = tuple(int(k) for k in keep)
    dims = rho.space.dims
    if len(keep) == 0:
        raise ValueError("keep must name at least one subsystem (a full trace is a scalar)")
    if len(set(keep)) != len(keep) or any(k < 0 or k >= len(dims) for k in keep):
        raise ValueError(f"keep indices {keep} invalid for dims {dims}")
    keep = tuple(sorted(keep))
    n_fac = len(dims)
    mat = rho.matrix.reshape(dims + dims)
    # contract row/col indices of each traced factor
    traced = [i for i in range(n_fac) if i not in keep]
    for count, i in enumerate(traced):
        # after earlier traces, factor i sits at position i - count
        pos = i - count
        ndim_half = mat.ndim // 2
        mat = np.trace(mat, axis1=pos, axis2=pos + ndim_half)
    new_dims = tuple(dims[i] for i in keep)
    side = int(np.prod(new_dims))
    mat = mat.reshape((side, side))
    new_space = HilbertSpace(new_dims)
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(mat, new_space, rho.herm_tol, rho.trace_tol, rho.positivity_tol)
    return Operator(mat, new_space)


def liouvillian(h: Operator, channels: Iterable[tuple[Operator, float]] = ()) -> Superoperator:
    """Generator of Markovian dynamics in superoperator form.

    Builds L with L vec(rho) = vec(-i[H, rho] + sum_k r_k (L_k rho L_k^dag
    - 1/2 {L_k^dag L_k, rho})) using column-stacking vectorization.

    Parameters
    ----------
    h : Operator
        Hamiltonian (Hermitian within tolerance).
    channels : iterable of (Operator, float)
        Jump operators with their non-negative rates.

    Returns
    -------
    Superoperator
    """
    if not h.is_hermitian():
        raise ValueError("Hamiltonian passed to liouvillian is not Hermitian")
    n = h.space.total
    eye = np.eye(n)
    hm = h.matrix
    sop = -1j * (np.kron(eye, hm) - np.kron(hm.T, eye))
    for op, rate in channels:
        rate = float(rate)
        if rate < 0.0:
            raise ValueError(f"channel rate must be non-negative, got {rate}")
        if op.space.dims != h.space.dims:
            raise ValueError("channel operator lives on a different space than the Hamiltonian")
        lm = op.matrix
        ldl = lm.conj().T @ lm
        sop = sop + rate * (
            np.kron(lm.conj(), lm)
            - 0.5 * np.kron(eye, ldl)
            - 0.5 * np.kron(ldl.T, eye)
        )
    return Superoperator(sop, h.space)


def _expm_hermitian_generator(hm: np.ndarray, t: float) -> np.ndarray:
    evals, evecs = np.linalg.eigh(hm)
    phases = np.exp(-1j * evals * t)
    return (evecs * phases) @ evecs.conj().T


def propagate_unitary(h: Operator, t: float, state):
    """Evolve a Ket or DensityMatrix under exp(-i H t).

    H must be Hermitian; the exponential is taken through the
    eigendecomposition, so the propagator is unitary to roundoff.
    """
    if not h.is_hermitian():
        raise ValueError("propagate_unitary requires a Hermitian Hamiltonian")
    u = _expm_hermitian_generator(h.matrix, float(t))
    if isinstance(state, Ket):
        _check_same_space(h, state, "unitary propagation")
        return Ket(u @ state.amplitudes, state.space)
    if isinstance(state, DensityMatrix):
        _check_same_space(h, state, "unitary propagation")
        return DensityMatrix(u @ state.matrix @ u.conj().T, state.space,
                             state.herm_tol, state.trace_tol, state.positivity_tol)
    raise TypeError("state must be a Ket or a DensityMatrix")


def expectation(op: Operator, state):
    """<A> in the given state; float for Hermitian A, complex otherwise."""
    if isinstance(state, Ket):
        _check_same_space(op, state, "expectation")
        psi = state.amplitudes
        val = complex(psi.conj() @ (op.matrix @ psi))
    elif isinstance(state, DensityMatrix):
        _check_same_space(op, state, "expectation")
        val = complex(np.trace(op.matrix @ state.matrix))
    else:
        raise TypeError("state must be a Ket or a DensityMatrix")
    if op.is_hermitian():
        return float(val.real)
    return val


def expm_multiply(generator: Superoperator, t: float) -> np.ndarray:
    """Dense matrix exponential of a superoperator generator at time t."""
    return scipy.linalg.expm(generator.matrix * float(t))


MatrixFn = Callable[[float], Operator]


def hamiltonian_matrix_fn(h) -> Callable[[float], np.ndarray]:
    """Normalize an Operator or callable t -> Operator/matrix into t -> ndarray."""
    if isinstance(h, Operator):
        hm = h.matrix

        def fixed(t: float, _hm=hm) -> np.ndarray:
            return _hm

        return fixed
    if callable(h):
        def varying(t: float) -> np.ndarray:
            op = h(t)
            if isinstance(op, Operator):
                return op.matrix
            return np.asarray(op, dtype=complex)

        return varying
    raise TypeError("Hamiltonian must be an Operator or a callable t -> Operator")
