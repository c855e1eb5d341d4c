"""Quantum-jump (Monte Carlo wave function) unraveling of Lindblad dynamics.

The non-Hermitian drift H_eff = H - (i/2) sum_m C_m^dag C_m shrinks the norm
of an unnormalized trajectory ket.  A uniform draw eps fixes the next crossing
of |psi|^2 = eps, the crossing is located by the integrator's root finder on
the dense solution, the jump channel is picked from the relative weights
|C_m psi|^2 at the crossing, and the state restarts as C_m psi / ||C_m psi||.

Randomness contract: each trajectory owns a counter-based Philox stream keyed
by (master_seed, trajectory_index).  Within a trajectory the draw order is
eps for the first segment, then (channel uniform, next eps) at every jump.
The ensemble reduction runs in fixed index order, so a repeated run with the
same master seed is bitwise identical.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Mapping, Optional, Union

import numpy as np
import scipy.integrate

from . import core
from .core import DensityMatrix, HilbertSpace, Ket, Operator
from .errors import ConfigError, InvariantViolation, SolverError
from .lindblad import _check_times

RTOL_DEFAULT = 1e-10
ATOL_DEFAULT = 1e-12
KET_NORM_TOL = 1e-8


@dataclasses.dataclass(frozen=True)
class JumpModel:
    """Hamiltonian plus collapse operators with rates folded in (C = sqrt(G) L)."""

    hamiltonian: Union[Operator, Callable[[float], np.ndarray]]
    collapse_ops: tuple = ()

    def __post_init__(self):
        ops = tuple(self.collapse_ops)
        object.__setattr__(self, "collapse_ops", ops)
        if isinstance(self.hamiltonian, Operator):
            if not self.hamiltonian.is_hermitian():
                raise ConfigError("hamiltonian must be Hermitian")
            space = self.hamiltonian.space
        elif callable(self.hamiltonian):
            if not ops:
                raise ConfigError(
                    "time-dependent model needs at least one collapse "
                    "operator to fix the space"
                )
            space = ops[0].space
        else:
            raise ConfigError("hamiltonian must be an Operator or a callable t -> matrix")
        for op in ops:
            if not isinstance(op, Operator):
                raise ConfigError("collapse_ops must be Operators")
            if op.space != space:
                raise ConfigError("collapse operator space mismatch")

    @property
    def space(self) -> HilbertSpace:
        if isinstance(self.hamiltonian, Operator):
            return self.hamiltonian.space
        return self.collapse_ops[0].space

    @property
    def time_dependent(self) -> bool:
        return not isinstance(self.hamiltonian, Operator)


@dataclasses.dataclass(frozen=True)
class Trajectory:
    """One stochastic realization sampled on a time grid.

    kets rows are normalized; jumps is a tuple of (time, channel index); seed
    records the (master_seed, index) stream key when the trajectory came from
    an ensemble run.
    """

    times: np.ndarray
    kets: np.ndarray
    jumps: tuple
    seed: Optional[tuple] = None

    def __post_init__(self):
        norms = np.linalg.norm(self.kets, axis=1)
        if np.any(np.abs(norms - 1.0) > KET_NORM_TOL):
            raise InvariantViolation("recorded trajectory kets are not normalized")
        jt = [t for t, _ in self.jumps]
        if any(b <= a for a, b in zip(jt, jt[1:])):
            raise InvariantViolation("jump times must be strictly increasing")

    @property
    def jump_times(self) -> np.ndarray:
        return np.array([t for t, _ in self.jumps])

    @property
    def jump_channels(self) -> np.ndarray:
        return np.array([m for _, m in self.jumps], dtype=int)


@dataclasses.dataclass(frozen=True)
class EnsembleResult:
    """Fixed-order reduction of an ensemble; jump_records keeps each
    trajectory's (time, channel) pairs so records can be exported."""

    times: np.ndarray
    mean_states: tuple
    expectations: dict
    std_errors: dict
    n_trajectories: int
    jump_statistics: dict
    jump_times: tuple
    jump_records: tuple = ()

    def __post_init__(self):
        band = 2.0 / math.sqrt(self.n_trajectories)
        for dm in self.mean_states:
            if abs(np.trace(dm.matrix).real - 1.0) > band:
                raise InvariantViolation("ensemble mean trace outside statistical band")


def effective_hamiltonian(model: JumpModel, t: float = 0.0) -> Operator:
    """H - (i/2) sum C^dag C; for a time-dependent model, evaluated at t."""
    h = core.hamiltonian_matrix_fn(model.hamiltonian)(t)
    drain = _drain_matrix(model)
    heff = h - 0.5j * drain
    # anti-Hermitian part is -(1/2) sum C^dag C, negative semidefinite
    anti = (heff - heff.conj().T) / 2j
    scale = max(1.0, np.abs(heff).max())
    if np.linalg.eigvalsh(anti).max() > 1e-12 * scale:
        raise InvariantViolation("anti-Hermitian part of H_eff is not negative semidefinite")
    return Operator(heff, model.space)


def _drain_matrix(model: JumpModel) -> np.ndarray:
    dim = model.space.total
    drain = np.zeros((dim, dim), dtype=complex)
    for op in model.collapse_ops:
        drain += op.matrix.conj().T @ op.matrix
    return drain


def _heff_fn(model: JumpModel):
    drain = _drain_matrix(model)
    if isinstance(model.hamiltonian, Operator):
        heff = model.hamiltonian.matrix - 0.5j * drain
        return lambda t: heff
    h_fn = core.hamiltonian_matrix_fn(model.hamiltonian)
    return lambda t: h_fn(t) - 0.5j * drain


def _spot_check_periodic_hermitian(model: JumpModel, t0: float, t1: float):
    if not model.time_dependent:
        return
    h_fn = core.hamiltonian_matrix_fn(model.hamiltonian)
    for t in np.linspace(t0, t1, 3):
        h = h_fn(t)
        if np.abs(h - h.conj().T).max() > core.HERMITICITY_TOL * max(1.0, np.abs(h).max()):
            raise ConfigError(f"hamiltonian callable is not Hermitian at t={t}")


def evolve_trajectory(
    model: JumpModel,
    psi0: Ket,
    times,
    rng,
    rtol: float = RTOL_DEFAULT,
    atol: float = ATOL_DEFAULT,
    seed_label: Optional[tuple] = None,
) -> Trajectory:
    """Integrate a single trajectory, recording normalized kets on the grid.

    rng is a numpy Generator (an int is promoted to one).  The jump time is
    located by the integrator's event root-finding on the dense solution,
    which resolves the norm^2 = eps crossing far below the 1e-10 relative
    tolerance the jump logic needs.
    """
    times = _check_times(times)
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    if psi0.space != model.space:
        raise ConfigError("psi0 space does not match model")
    amps = np.asarray(psi0.amplitudes, dtype=complex)
    if abs(np.linalg.norm(amps) - 1.0) > KET_NORM_TOL:
        raise ConfigError("psi0 must be normalized")
    _spot_check_periodic_hermitian(model, times[0], times[-1])

    heff = _heff_fn(model)
    c_mats = [op.matrix for op in model.collapse_ops]

    def rhs(t, y):
        return -1j * (heff(t) @ y)

    n_times = times.size
    dim = amps.size
    kets = np.empty((n_times, dim), dtype=complex)
    kets[0] = amps
    jumps = []
    ptr = 1
    t_cur = float(times[0])
    psi = amps.copy()
    eps = rng.random()
    t_end = float(times[-1])

    while True:
        def norm_event(t, y, _eps=eps):
            return float((y.conj() @ y).real) - _eps

        norm_event.terminal = True
        norm_event.direction = -1

        t_eval = times[ptr:][times[ptr:] > t_cur]
        sol = scipy.integrate.solve_ivp(
            rhs, (t_cur, t_end), psi, method="RK45",
            rtol=rtol, atol=atol, t_eval=t_eval, events=norm_event,
        )
        if not sol.success:
            raise SolverError(f"trajectory integration failed: {sol.message}")

        # a terminal event before the first requested sample leaves sol.t empty
        n_seg = len(sol.t)
        if n_seg:
            ys = np.asarray(sol.y)
            for k in range(n_seg):
                y = ys[:, k]
                nrm = np.linalg.norm(y)
                if nrm == 0.0:
                    raise SolverError("trajectory norm collapsed to zero")
                kets[ptr] = y / nrm
                ptr += 1
            # norm^2 must not grow between jumps;
            # d(norm^2)/dt = -<psi|sum C^dag C|psi> <= 0
            if n_seg > 1:
                seg = np.sum(np.abs(ys) ** 2, axis=0)
                if np.any(np.diff(seg) > 1e-8):
                    raise InvariantViolation("trajectory norm increased between jumps")

        if sol.t_events[0].size == 0:
            break

        t_jump = float(sol.t_events[0][0])
        psi_j = sol.y_events[0][0]
        weights = np.array([np.sum(np.abs(c @ psi_j) ** 2) for c in c_mats])
        total = weights.sum()
        if total <= 0.0:
            raise SolverError(
                "all jump channels numerically dead at the triggered jump; "
                f"t={t_jump!r}, state={psi_j!r}"
            )
        u = rng.random()
        channel = int(np.searchsorted(np.cumsum(weights) / total, u, side="right"))
        channel = min(channel, len(c_mats) - 1)
        post = c_mats[channel] @ psi_j
        psi = post / np.linalg.norm(post)
        jumps.append((t_jump, channel))
        t_cur = t_jump
        eps = rng.random()
        # grid points the event skipped past sit at the jump time itself
        while ptr < n_times and times[ptr] <= t_cur:
            kets[ptr] = psi
            ptr += 1
        if ptr >= n_times and t_cur >= t_end:
            break

    if ptr != n_times:
        raise SolverError("internal grid bookkeeping error in trajectory sampling")
    return Trajectory(times=times, kets=kets, jumps=tuple(jumps), seed=seed_label)


def _trajectory_rng(master_seed: int, index: int) -> np.random.Generator:
    key = np.array([master_seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def ensemble_average(
    model: JumpModel,
    psi0: Ket,
    times,
    n_traj: int,
    master_seed: int,
    observables: Optional[Mapping[str, Operator]] = None,
    rtol: float = RTOL_DEFAULT,
    atol: float = ATOL_DEFAULT,
    threads: int = 1,
) -> EnsembleResult:
    """Average n_traj trajectories with deterministic per-trajectory streams.

    `threads` > 1 computes trajectories on a thread pool in bounded windows;
    the reduction always runs in trajectory order, so the result is
    bitwise identical to the serial one.
    """
    if n_traj < 1:
        raise ConfigError("n_traj must be >= 1")
    if not (0 <= int(master_seed) < 2**64):
        raise ConfigError("master_seed must fit in 64 bits")
    if threads < 1:
        raise ConfigError("threads must be >= 1")
    times = _check_times(times)
    observables = dict(observables or {})
    for name, op in observables.items():
        if op.space != model.space:
            raise ConfigError(f"observable {name!r} space mismatch")

    dim = model.space.total
    n_times = times.size
    rho_sum = np.zeros((n_times, dim, dim), dtype=complex)
    exp_sum = {name: np.zeros(n_times) for name in observables}
    exp_sumsq = {name: np.zeros(n_times) for name in observables}
    herm = {name: op.is_hermitian() for name, op in observables.items()}
    n_channels = len(model.collapse_ops)
    per_channel = np.zeros(n_channels)
    totals = np.zeros(n_traj)
    all_jump_times = []
    all_jump_records = []

    def one(idx: int) -> Trajectory:
        rng = _trajectory_rng(int(master_seed), idx)
        return evolve_trajectory(
            model, psi0, times, rng, rtol=rtol, atol=atol,
            seed_label=(int(master_seed), idx),
        )

    def trajectories():
        if threads == 1:
            for idx in range(n_traj):
                yield one(idx)
            return
        from concurrent.futures import ThreadPoolExecutor

        window = 4 * threads
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pending = []
            for idx in range(n_traj):
                pending.append(pool.submit(one, idx))
                if len(pending) >= window:
                    yield pending.pop(0).result()
            for fut in pending:
                yield fut.result()

    for idx, traj in enumerate(trajectories()):
        k = traj.kets
        rho_sum += np.einsum("ti,tj->tij", k, k.conj())
        for name, op in observables.items():
            val = np.einsum("ti,ij,tj->t", k.conj(), op.matrix, k)
            val = val.real if herm[name] else val
            exp_sum[name] += val.real
            exp_sumsq[name] += val.real**2
        totals[idx] = len(traj.jumps)
        for _, m in traj.jumps:
            per_channel[m] += 1
        all_jump_times.append(traj.jump_times)
        all_jump_records.append(traj.jumps)

    rho_mean = rho_sum / n_traj
    mean_states = tuple(
        DensityMatrix(rho_mean[i], model.space, positivity_tol=1e-7)
        for i in range(n_times)
    )
    expectations = {}
    std_errors = {}
    for name in observables:
        mean = exp_sum[name] / n_traj
        expectations[name] = mean
        if n_traj > 1:
            var = (exp_sumsq[name] - n_traj * mean**2) / (n_traj - 1)
            std_errors[name] = np.sqrt(np.maximum(var, 0.0) / n_traj)
        else:
            std_errors[name] = np.zeros(n_times)

    jump_statistics = {
        "mean_total": float(totals.mean()),
        "std_total": float(totals.std(ddof=1)) if n_traj > 1 else 0.0,
        "per_channel_mean": per_channel / n_traj,
        "total_counts": totals,
    }
    return EnsembleResult(
        times=times,
        mean_states=mean_states,
        expectations=expectations,
        std_errors=std_errors,
        n_trajectories=n_traj,
        jump_statistics=jump_statistics,
        jump_times=tuple(all_jump_times),
        jump_records=tuple(all_jump_records),
    )


def transmon_three_level(j_coupling, delta, gamma_e, gamma_f) -> JumpModel:
    """Three-level cascade model: |g>, |e>, |f> with e-f coupling and decay.

    H = J(|e><f| + |f><e|) + (delta/2)(|e><e| + |f><f|), jumps
    C_e = sqrt(gamma_e)|g><e| and C_f = sqrt(gamma_f)|e><f|.
    """
    if gamma_e < 0 or gamma_f < 0:
        raise ConfigError("decay rates must be nonnegative")
    space = HilbertSpace((3,))
    h = np.zeros((3, 3), dtype=complex)
    h[1, 2] = h[2, 1] = j_coupling
    h[1, 1] = h[2, 2] = delta / 2.0
    c_e = np.zeros((3, 3), dtype=complex)
    c_e[0, 1] = math.sqrt(gamma_e)
    c_f = np.zeros((3, 3), dtype=complex)
    c_f[1, 2] = math.sqrt(gamma_f)
    return JumpModel(
        hamiltonian=Operator(h, space),
        collapse_ops=(Operator(c_e, space), Operator(c_f, space)),
    )
