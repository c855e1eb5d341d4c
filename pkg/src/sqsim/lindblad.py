"""Markovian master-equation solver.

d rho / dt = -i [H, rho] + sum_k r_k (L_k rho L_k^dag - 1/2 {L_k^dag L_k, rho})

Two integration routes: adaptive embedded Runge-Kutta on the vectorized
right-hand side (works for time-dependent Hamiltonians), or stepping with
the superoperator exponential for time-independent generators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
import scipy.integrate
import scipy.linalg

from .core import (
    DensityMatrix,
    HilbertSpace,
    Operator,
    hamiltonian_matrix_fn,
    liouvillian,
    sigma_minus,
    sigma_z,
    unvec,
    vec,
)
from .errors import ConfigError, InvariantViolation, SolverError

__all__ = [
    "LindbladModel",
    "EvolutionResult",
    "qubit_channels",
    "decoherence_times",
    "solve_lindblad",
]

RTOL_DEFAULT = 1e-8
ATOL_DEFAULT = 1e-10
TRACE_DRIFT_LIMIT = 1e-8

Hamiltonian = Union[Operator, Callable[[float], Operator]]


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian (fixed or t -> Operator) plus weighted jump channels."""

    hamiltonian: Hamiltonian
    channels: tuple = ()

    def __post_init__(self):
        chans = tuple((op, float(rate)) for op, rate in self.channels)
        for op, rate in chans:
            if not isinstance(op, Operator):
                raise ConfigError("each channel must pair an Operator with a rate")
            if rate < 0.0:
                raise ConfigError(f"channel rates must be non-negative, got {rate}")
        object.__setattr__(self, "channels", chans)
        if not (isinstance(self.hamiltonian, Operator) or callable(self.hamiltonian)):
            raise ConfigError("hamiltonian must be an Operator or a callable t -> Operator")

    @property
    def space(self) -> HilbertSpace:
        if isinstance(self.hamiltonian, Operator):
            return self.hamiltonian.space
        return self.hamiltonian(0.0).space

    @property
    def time_dependent(self) -> bool:
        return not isinstance(self.hamiltonian, Operator)


@dataclass(frozen=True)
class EvolutionResult:
    """Density-matrix trajectory on a reporting grid.

    `expectations` maps observable names to arrays over the grid;
    `diagnostics` records trace drift, the most negative eigenvalue seen,
    and solver bookkeeping.  `states` is None when not stored.
    """

    times: np.ndarray
    states: Optional[list]
    expectations: dict
    diagnostics: dict


def qubit_channels(gamma1: float, gamma_phi: float):
    """Relaxation plus dephasing channel pair for a single qubit.

    Returns [(sigma_minus, gamma1), (sigma_z, gamma_phi / 2)]; with this
    normalization the off-diagonal decay rate is gamma_phi + gamma1 / 2.
    Zero rates are kept as zero-weight channels.
    """
    if gamma1 < 0.0 or gamma_phi < 0.0:
        raise ConfigError("decay rates must be non-negative")
    return [(sigma_minus(), float(gamma1)), (sigma_z(), float(gamma_phi) / 2.0)]


def decoherence_times(gamma1: float, gamma_phi: float):
    """(T1, T2) from the channel rates; infinities when a rate vanishes."""
    if gamma1 < 0.0 or gamma_phi < 0.0:
        raise ConfigError("decay rates must be non-negative")
    gamma2 = gamma_phi + gamma1 / 2.0
    t1 = float("inf") if gamma1 == 0.0 else 1.0 / gamma1
    t2 = float("inf") if gamma2 == 0.0 else 1.0 / gamma2
    return t1, t2


def _check_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ConfigError("times must be a 1-d grid with at least two points")
    if np.any(np.diff(t) <= 0.0):
        raise ConfigError("times must be strictly increasing")
    return t


def _observable_series(mats, observables):
    if not observables:
        return {}
    out = {}
    for name, op in observables.items():
        herm = op.is_hermitian()
        vals = np.array([np.trace(op.matrix @ m) for m in mats])
        out[name] = vals.real if herm else vals
    return out


def _report(times, raw_mats, space, observables, store_states, extra_diag):
    """Shared post-processing: symmetrize, diagnose, package."""
    traces = np.array([np.trace(m).real for m in raw_mats])
    sym = [(m + m.conj().T) / 2.0 for m in raw_mats]
    min_eig = min(float(np.linalg.eigvalsh(m).min()) for m in sym)
    diag = {
        "trace_drift": float(np.abs(traces - 1.0).max()),
        "min_eigenvalue": min_eig,
    }
    diag.update(extra_diag)
    states = None
    if store_states:
        states = [
            DensityMatrix(m, space, trace_tol=1e-7, positivity_tol=1e-7) for m in sym
        ]
    return EvolutionResult(
        times=times,
        states=states,
        expectations=_observable_series(sym, observables),
        diagnostics=diag,
    )


def solve_lindblad(
    model: LindbladModel,
    rho0: DensityMatrix,
    times,
    observables: Optional[dict] = None,
    store_states: bool = True,
    method: str = "rk",
    rtol: float = RTOL_DEFAULT,
    atol: float = ATOL_DEFAULT,
) -> EvolutionResult:
    """Integrate the master equation over a reporting grid.

    Parameters
    ----------
    model : LindbladModel
    rho0 : DensityMatrix
        Initial state; `times[0]` is its time.
    times : array_like
        Strictly increasing reporting grid.
    observables : dict, optional
        Name -> Operator; expectation series are returned for each.
    store_states : bool
        Keep the DensityMatrix trajectory (True) or only expectations.
    method : {"rk", "expm"}
        Adaptive Runge-Kutta on the vectorized RHS, or stepping with the
        superoperator exponential (time-independent models only).

    Notes
    -----
    Reported states are symmetrized; the trace is never renormalized, and
    a drift beyond 1e-8 raises InvariantViolation.
    """
    times = _check_times(times)
    space = model.space
    if rho0.space.dims != space.dims:
        raise ConfigError("initial state lives on a different space than the model")
    n = space.total

    if model.time_dependent:
        if method == "expm":
            raise ConfigError("the exponential route needs a time-independent Hamiltonian")
        hfn = hamiltonian_matrix_fn(model.hamiltonian)
        for t_probe in (times[0], 0.5 * (times[0] + times[-1]), times[-1]):
            hm = hfn(float(t_probe))
            scale = max(1.0, float(np.abs(hm).max()))
            if np.abs(hm - hm.conj().T).max() > 1e-10 * scale:
                raise ConfigError(f"hamiltonian is not Hermitian at t = {t_probe:g}")
        dissipator = liouvillian(
            Operator(np.zeros((n, n)), space), model.channels
        ).matrix

        def rhs(t, y):
            rho = unvec(y, n)
            hm = hfn(t)
            out = -1j * (hm @ rho - rho @ hm)
            return vec(out) + dissipator @ y

        raw, nfev = _integrate_rk(rhs, rho0.matrix, times, n, rtol, atol)
        extra = {"method": "rk", "rhs_evaluations": nfev}
    else:
        gen = liouvillian(model.hamiltonian, model.channels).matrix
        if method == "rk":
            def rhs(t, y, _g=gen):
                return _g @ y

            raw, nfev = _integrate_rk(rhs, rho0.matrix, times, n, rtol, atol)
            extra = {"method": "rk", "rhs_evaluations": nfev}
        elif method == "expm":
            raw = _integrate_expm(gen, rho0.matrix, times, n)
            extra = {"method": "expm", "rhs_evaluations": 0}
        else:
            raise ConfigError(f"unknown method {method!r}; choose 'rk' or 'expm'")

    result = _report(times, raw, space, observables, store_states, extra)
    if result.diagnostics["trace_drift"] > TRACE_DRIFT_LIMIT:
        raise InvariantViolation(
            f"trace drifted by {result.diagnostics['trace_drift']:.3e} (limit {TRACE_DRIFT_LIMIT:g}); "
            "tighten rtol/atol"
        )
    return result


def _integrate_rk(rhs, rho0_mat, times, n, rtol, atol):
    sol = scipy.integrate.solve_ivp(
        rhs,
        (times[0], times[-1]),
        vec(rho0_mat).astype(complex),
        method="RK45",
        t_eval=times,
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise SolverError(f"master-equation integration failed: {sol.message}")
    return [unvec(sol.y[:, k], n) for k in range(sol.y.shape[1])], int(sol.nfev)


def _integrate_expm(gen, rho0_mat, times, n):
    diffs = np.diff(times)
    props = {}
    for dt in np.unique(diffs):
        props[dt] = scipy.linalg.expm(gen * dt)
    out = [rho0_mat.astype(complex)]
    y = vec(rho0_mat).astype(complex)
    for dt in diffs:
        y = props[dt] @ y
        out.append(unvec(y, n))
    return out
