"""Post-Markovian master equation with a memory kernel.

The evolution law is

    drho/dt = L0 rho(t) + L1 * integral_0^t dt' K(t') e^{(L0+L1)t'} rho(t-t')

integrated by a Heun predictor-corrector on a uniform grid with trapezoidal
history convolution.  The propagated-history table keeps one row per past
state, advanced by a single cached one-step exponential each step, so the
convolution costs one small matrix product per step instead of a fresh
exponential per (step, lag) pair.

Both trace functionals (of L0 and L1) vanish by model validation, and every
Runge-Kutta combination of right-hand sides inherits that, so the trace is
preserved to roundoff; the 1e-6 tolerance in the contract absorbs kernel
tabulation error only.
"""

from __future__ import annotations

import dataclasses
from typing import Mapping, Optional

import numpy as np
import scipy.linalg

from .core import DensityMatrix, Superoperator, vec
from .errors import ConfigError, InvariantViolation
from .lindblad import EvolutionResult, _check_times, _report

TRACE_ANNIHILATION_TOL = 1e-12
TRACE_TOL = 1e-6
HERMITICITY_TOL = 1e-8
HISTORY_BYTES_LIMIT = 1 << 28


@dataclasses.dataclass(frozen=True)
class MemoryKernel:
    """Scalar memory kernel K(t); see the classmethod constructors."""

    kind: str
    gamma: Optional[float] = None
    table_times: Optional[np.ndarray] = None
    table_values: Optional[np.ndarray] = None

    @classmethod
    def exponential(cls, gamma: float) -> "MemoryKernel":
        """K(t) = exp(-gamma t), as printed; total mass 1/gamma."""
        if gamma <= 0:
            raise ConfigError("kernel decay rate must be positive")
        return cls(kind="exponential", gamma=float(gamma))

    @classmethod
    def normalized_exponential(cls, gamma: float) -> "MemoryKernel":
        """K(t) = gamma exp(-gamma t); unit mass, so gamma -> inf is a delta."""
        if gamma <= 0:
            raise ConfigError("kernel decay rate must be positive")
        return cls(kind="normalized_exponential", gamma=float(gamma))

    @classmethod
    def tabulated(cls, times, values) -> "MemoryKernel":
        t = np.asarray(times, dtype=float)
        v = np.asarray(values, dtype=float)
        if t.ndim != 1 or t.size < 2 or v.shape != t.shape:
            raise ConfigError("tabulated kernel needs matching 1-d times and values")
        if np.any(np.diff(t) <= 0):
            raise ConfigError("tabulated kernel times must be strictly increasing")
        return cls(kind="tabulated", table_times=t, table_values=v)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "exponential":
            out = np.exp(-self.gamma * t)
        elif self.kind == "normalized_exponential":
            out = self.gamma * np.exp(-self.gamma * t)
        else:
            # beyond the table the kernel is taken as fully decayed
            out = np.interp(t, self.table_times, self.table_values, right=0.0)
        return out


def _check_trace_annihilating(sup: Superoperator, name: str):
    dim = sup.space.total
    tr_vec = vec(np.eye(dim, dtype=complex)).conj()
    defect = np.abs(tr_vec @ sup.matrix).max()
    if defect > TRACE_ANNIHILATION_TOL * max(1.0, np.abs(sup.matrix).max()):
        raise ConfigError(f"{name} does not annihilate the trace (defect {defect:.2e})")


@dataclasses.dataclass(frozen=True)
class PMMEModel:
    l0: Superoperator
    l1: Superoperator
    kernel: MemoryKernel

    def __post_init__(self):
        if self.l0.space != self.l1.space:
            raise ConfigError("L0 and L1 act on different spaces")
        _check_trace_annihilating(self.l0, "L0")
        _check_trace_annihilating(self.l1, "L1")


def nonmarkov_dephasing(gamma_z: float) -> Superoperator:
    """Dephasing map rho -> gamma_z (sz rho sz - rho) as a superoperator."""
    if gamma_z < 0:
        raise ConfigError("gamma_z must be nonnegative")
    from .core import HilbertSpace, sigma_z

    sz = sigma_z().matrix
    mat = gamma_z * (np.kron(sz.T, sz) - np.eye(4, dtype=complex))
    return Superoperator(mat, HilbertSpace((2,)))


def solve_pmme(
    model: PMMEModel,
    rho0: DensityMatrix,
    times,
    observables: Optional[Mapping] = None,
    store_states: bool = False,
) -> EvolutionResult:
    """Heun stepping of the memory integro-differential equation."""
    times = _check_times(times)
    h = float(times[1] - times[0])
    if np.abs(np.diff(times) - h).max() > 1e-9 * h:
        raise ConfigError("history convolution requires a uniform grid")
    space = rho0.space
    if space != model.l0.space:
        raise ConfigError("rho0 space does not match the model")
    dim = space.total
    d2 = dim * dim
    if d2 > 64 * 64:
        raise ConfigError("dense history method is limited to dimension 64")
    n = times.size
    if n * d2 * 16 > HISTORY_BYTES_LIMIT:
        raise ConfigError("history table would exceed the memory budget; coarsen the grid")

    l0 = model.l0.matrix
    l1 = model.l1.matrix
    has_memory = np.abs(l1).max() > 0.0
    e1 = scipy.linalg.expm((l0 + l1) * h)
    e1_t = e1.T
    karr = model.kernel(np.arange(n) * h)

    x = np.empty((n, d2), dtype=complex)
    x[0] = vec(rho0.matrix)
    if has_memory:
        z = np.empty((n, d2), dtype=complex)
        z[0] = x[0]

    def conv(m):
        # trapezoid over lag j = 0..m of K_j E_j x_{m-j}; rows of z hold E_{m-i} x_i
        if m == 0:
            return np.zeros(d2, dtype=complex)
        w = karr[m::-1].astype(complex).copy()
        w[0] *= 0.5
        w[-1] *= 0.5
        return h * (w @ z[: m + 1])

    for m in range(n - 1):
        if has_memory:
            rhs = x[m] @ l0.T + conv(m) @ l1.T
            z[: m + 1] = z[: m + 1] @ e1_t
            z[m + 1] = x[m] + h * rhs          # predictor fills the new history slot
            rhs_star = z[m + 1] @ l0.T + conv(m + 1) @ l1.T
            x[m + 1] = x[m] + 0.5 * h * (rhs + rhs_star)
            z[m + 1] = x[m + 1]
        else:
            rhs = x[m] @ l0.T
            pred = x[m] + h * rhs
            x[m + 1] = x[m] + 0.5 * h * (rhs + pred @ l0.T)

    # row t holds a column-stacked state: entry a + dim*b is rho[a, b]
    mats = x.reshape(n, dim, dim).transpose(0, 2, 1)
    herm = np.abs(mats - mats.conj().transpose(0, 2, 1)).max()
    if herm > HERMITICITY_TOL * max(1.0, np.abs(mats).max()):
        raise InvariantViolation(f"PMME evolution lost Hermiticity (defect {herm:.2e})")
    traces = np.einsum("tii->t", mats)
    drift = np.abs(traces - 1.0).max()
    if drift > TRACE_TOL:
        raise InvariantViolation(f"PMME trace drift {drift:.2e} exceeds {TRACE_TOL}")
    extra = {"kernel": model.kernel.kind, "step": h, "memory_active": bool(has_memory)}
    return _report(times, mats, space, observables, store_states, extra)
