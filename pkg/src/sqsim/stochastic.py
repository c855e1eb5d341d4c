"""Stochastic Schrodinger and master equations on a uniform grid.

Three integrators share the Euler-Maruyama core:

* the linear Markovian SSE with complex Wiener increments,
  d|phi> = [-iH - (1/2) sum S^dag S]|phi> dt + sum S|phi> dW  (unnormalized);
* the normalized sigma_z-measurement SSE with real increments, renormalized
  each step with the defect logged;
* the sigma_z-measurement SME, advanced by a one-step measurement-operator
  factorization rho -> M rho M / tr(M rho M) with M = a*1 + b*sigma_z
  diagonal.  The factorized step agrees with the double-commutator SME
  through O(h) but is exactly trace-one and completely positive, so the
  positivity monitor only fires on genuinely bad input.  A raw
  Euler-Maruyama step leaves the state cone by O(k h) whenever the state is
  near pure, which is the generic situation here; the congruence form is
  what makes pure-state runs viable at finite step.

The homodyne record V = <sigma_z> + dW / (sqrt(4k) dt) is generated from the
same increments that drive the state, giving the physical record variance
1/(4 k dt).  Ensembles draw one counter-based Philox stream per path, keyed
by (master_seed, path index), and reduce in fixed order, so runs with the
same seed are bitwise identical.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from typing import Optional, Sequence

import numpy as np

from .core import DensityMatrix, HilbertSpace, Ket, Operator, sigma_z
from .errors import ConfigError, SolverError

KH_WARN = 0.01
POSITIVITY_ABORT = -1e-6
_SCHEMES = ("euler_maruyama", "heun")


@dataclasses.dataclass(frozen=True)
class WienerPath:
    """Pre-drawn Wiener increments, one column per channel.

    Real increments have variance h; complex ones satisfy E[dW dW*] = h and
    E[dW dW] = 0 (each quadrature carries h/2).
    """

    step: float
    increments: np.ndarray
    seed: Optional[int] = None
    is_complex: bool = False

    def __post_init__(self):
        if self.step <= 0:
            raise ConfigError("Wiener step must be positive")
        inc = np.asarray(self.increments)
        if inc.ndim != 2:
            raise ConfigError("increments must be (n_steps, n_channels)")
        object.__setattr__(self, "increments", inc)

    @classmethod
    def generate(cls, rng, n_steps: int, n_channels: int, step: float,
                 complex_increments: bool = False, seed: Optional[int] = None
                 ) -> "WienerPath":
        if isinstance(rng, (int, np.integer)):
            seed = int(rng)
            rng = np.random.default_rng(seed)
        if n_steps < 1 or n_channels < 1:
            raise ConfigError("need at least one step and one channel")
        if complex_increments:
            x1 = rng.standard_normal((n_steps, n_channels))
            x2 = rng.standard_normal((n_steps, n_channels))
            inc = math.sqrt(step / 2.0) * (x1 + 1j * x2)
        else:
            inc = math.sqrt(step) * rng.standard_normal((n_steps, n_channels))
        return cls(step=float(step), increments=inc, seed=seed,
                   is_complex=complex_increments)

    def coarsened(self) -> "WienerPath":
        """Pairwise-summed increments: the same Brownian path at step 2h."""
        n = self.increments.shape[0]
        if n % 2:
            raise ConfigError("need an even number of steps to coarsen")
        inc = self.increments[0::2] + self.increments[1::2]
        return WienerPath(step=2.0 * self.step, increments=inc, seed=self.seed,
                          is_complex=self.is_complex)


@dataclasses.dataclass(frozen=True)
class MeasurementRecord:
    """Homodyne-style record; times are the left edges of the integration steps."""

    times: np.ndarray
    values: np.ndarray
    strength: float

    def __post_init__(self):
        if self.times.shape != self.values.shape:
            raise ConfigError("record times and values must have matching length")


def _uniform_step(times: np.ndarray) -> float:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise ConfigError("need a 1-d grid with at least two points")
    h = float(times[1] - times[0])
    if h <= 0 or np.abs(np.diff(times) - h).max() > 1e-9 * h:
        raise ConfigError("stochastic integration requires a uniform grid")
    return h


def _path_rng(master_seed: int, index: int) -> np.random.Generator:
    key = np.array([master_seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _check_seed(master_seed):
    if not (0 <= int(master_seed) < 2**64):
        raise ConfigError("master_seed must fit in 64 bits")


def _ensemble_increments(master_seed, n_paths, n_steps, h, complex_increments):
    _check_seed(master_seed)
    shape = (n_paths, n_steps)
    if complex_increments:
        out = np.empty(shape, dtype=complex)
        for p in range(n_paths):
            rng = _path_rng(int(master_seed), p)
            x1 = rng.standard_normal(n_steps)
            x2 = rng.standard_normal(n_steps)
            out[p] = math.sqrt(h / 2.0) * (x1 + 1j * x2)
    else:
        out = np.empty(shape)
        for p in range(n_paths):
            rng = _path_rng(int(master_seed), p)
            out[p] = math.sqrt(h) * rng.standard_normal(n_steps)
    return out


@dataclasses.dataclass(frozen=True)
class SSETrajectory:
    """Linear-SSE sample path; kets are raw (norm carries physical weight)."""

    times: np.ndarray
    kets: np.ndarray
    wiener: WienerPath


@dataclasses.dataclass(frozen=True)
class DiffusiveTrajectory:
    """Normalized measurement-SSE path with the per-step renormalization log."""

    times: np.ndarray
    kets: np.ndarray
    norm_defects: np.ndarray
    wiener: WienerPath


def _sse_markov_matrices(h_op: Operator, channels: Sequence[Operator]):
    if not h_op.is_hermitian():
        raise ConfigError("hamiltonian must be Hermitian")
    space = h_op.space
    s_mats = []
    for s in channels:
        if not isinstance(s, Operator) or s.space != space:
            raise ConfigError("channel operators must share the Hamiltonian space")
        s_mats.append(s.matrix)
    drift = -1j * h_op.matrix.copy()
    for s in s_mats:
        drift -= 0.5 * (s.conj().T @ s)
    return drift, s_mats


def solve_sse_markov(
    h_op: Operator,
    channels: Sequence[Operator],
    psi0: Ket,
    times,
    scheme: str = "euler_maruyama",
    rng=None,
    wiener: Optional[WienerPath] = None,
) -> SSETrajectory:
    """Linear (unnormalized) SSE with complex increments, one sample path."""
    if scheme not in _SCHEMES:
        raise ConfigError(f"scheme must be one of {_SCHEMES}")
    times = np.asarray(times, dtype=float)
    h = _uniform_step(times)
    drift, s_mats = _sse_markov_matrices(h_op, channels)
    if psi0.space != h_op.space:
        raise ConfigError("psi0 space mismatch")
    n_steps = times.size - 1
    if wiener is None:
        if rng is None:
            raise ConfigError("provide rng or a pre-drawn WienerPath")
        if isinstance(rng, (int, np.integer)):
            rng = np.random.default_rng(int(rng))
        wiener = WienerPath.generate(rng, n_steps, max(len(s_mats), 1), h,
                                     complex_increments=True)
    else:
        if not wiener.is_complex:
            raise ConfigError("the linear SSE needs complex Wiener increments")
        if wiener.increments.shape[0] != n_steps or abs(wiener.step - h) > 1e-12 * h:
            raise ConfigError("WienerPath does not match the grid")
    if s_mats and wiener.increments.shape[1] < len(s_mats):
        raise ConfigError("WienerPath has fewer channels than the model")

    if np.abs(drift).max() * h > 0.1:
        warnings.warn("drift step exceeds 0.1; strong-order error may dominate",
                      stacklevel=2)

    dim = psi0.space.total
    kets = np.empty((times.size, dim), dtype=complex)
    psi = np.asarray(psi0.amplitudes, dtype=complex).copy()
    kets[0] = psi
    inc = wiener.increments
    for n in range(n_steps):
        diffusion = np.zeros(dim, dtype=complex)
        for a, s in enumerate(s_mats):
            diffusion += inc[n, a] * (s @ psi)
        if scheme == "euler_maruyama":
            psi = psi + h * (drift @ psi) + diffusion
        else:
            # Heun on the drift only; the diffusion stays at the left point
            # so the scheme samples the Ito integral, not Stratonovich
            pred = psi + h * (drift @ psi) + diffusion
            psi = psi + 0.5 * h * (drift @ (psi + pred)) + diffusion
        kets[n + 1] = psi
    return SSETrajectory(times=times, kets=kets, wiener=wiener)


@dataclasses.dataclass(frozen=True)
class SSEEnsemble:
    times: np.ndarray
    mean_matrices: np.ndarray
    mean_norm_sq: np.ndarray
    se_norm_sq: np.ndarray
    n_paths: int


def sse_markov_ensemble(
    h_op: Operator,
    channels: Sequence[Operator],
    psi0: Ket,
    times,
    n_paths: int,
    master_seed: int,
    scheme: str = "euler_maruyama",
) -> SSEEnsemble:
    """Vectorized ensemble of linear-SSE paths; mean projector per grid time."""
    if scheme not in _SCHEMES:
        raise ConfigError(f"scheme must be one of {_SCHEMES}")
    if n_paths < 1:
        raise ConfigError("n_paths must be >= 1")
    times = np.asarray(times, dtype=float)
    h = _uniform_step(times)
    drift, s_mats = _sse_markov_matrices(h_op, channels)
    n_steps = times.size - 1
    n_ch = max(len(s_mats), 1)
    dim = psi0.space.total

    _check_seed(master_seed)
    inc = np.empty((n_paths, n_steps, n_ch), dtype=complex)
    for p in range(n_paths):
        rng = _path_rng(int(master_seed), p)
        x1 = rng.standard_normal((n_steps, n_ch))
        x2 = rng.standard_normal((n_steps, n_ch))
        inc[p] = math.sqrt(h / 2.0) * (x1 + 1j * x2)

    psi = np.broadcast_to(np.asarray(psi0.amplitudes, dtype=complex),
                          (n_paths, dim)).copy()
    mean_mats = np.empty((times.size, dim, dim), dtype=complex)
    mean_norm = np.empty(times.size)
    se_norm = np.empty(times.size)

    def record(i, batch):
        mean_mats[i] = np.einsum("pi,pj->ij", batch, batch.conj()) / n_paths
        norms = np.sum(np.abs(batch) ** 2, axis=1)
        mean_norm[i] = norms.mean()
        se_norm[i] = norms.std(ddof=1) / math.sqrt(n_paths) if n_paths > 1 else 0.0

    record(0, psi)
    drift_t = drift.T
    s_ts = [s.T for s in s_mats]
    for n in range(n_steps):
        diffusion = np.zeros_like(psi)
        for a, s_t in enumerate(s_ts):
            diffusion += inc[:, n, a][:, None] * (psi @ s_t)
        if scheme == "euler_maruyama":
            psi = psi + h * (psi @ drift_t) + diffusion
        else:
            pred = psi + h * (psi @ drift_t) + diffusion
            psi = psi + 0.5 * h * ((psi + pred) @ drift_t) + diffusion
        record(n + 1, psi)
    return SSEEnsemble(times=times, mean_matrices=mean_mats,
                       mean_norm_sq=mean_norm, se_norm_sq=se_norm,
                       n_paths=n_paths)


def measurement_signal(expect_sz: float, k: float, dt: float, rng) -> float:
    """One record sample: mean <sigma_z>, variance 1/(4 k dt)."""
    if k <= 0 or dt <= 0:
        raise ConfigError("k and dt must be positive")
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    dw = rng.normal(0.0, math.sqrt(dt))
    return float(expect_sz) + dw / (math.sqrt(4.0 * k) * dt)


def _z_wiener(k, times, rng, wiener):
    h = _uniform_step(np.asarray(times, dtype=float))
    if k <= 0:
        raise ConfigError("measurement strength k must be positive")
    n_steps = len(times) - 1
    if wiener is None:
        if rng is None:
            raise ConfigError("provide rng or a pre-drawn WienerPath")
        if isinstance(rng, (int, np.integer)):
            rng = np.random.default_rng(int(rng))
        wiener = WienerPath.generate(rng, n_steps, 1, h)
    else:
        if wiener.is_complex:
            raise ConfigError("measurement unravelings need real increments")
        if wiener.increments.shape != (n_steps, 1) or abs(wiener.step - h) > 1e-12 * h:
            raise ConfigError("WienerPath does not match the grid")
    if k * h > KH_WARN:
        warnings.warn(f"k*h = {k * h:.3g} exceeds {KH_WARN}; refine the grid",
                      stacklevel=3)
    return h, wiener


def solve_sse_z(k: float, psi0: Ket, times, rng=None,
                wiener: Optional[WienerPath] = None):
    """Normalized sigma_z-measurement SSE; returns (trajectory, record)."""
    times = np.asarray(times, dtype=float)
    h, wiener = _z_wiener(k, times, rng, wiener)
    if psi0.space.total != 2:
        raise ConfigError("sigma_z measurement is a two-level unraveling")
    psi = np.asarray(psi0.amplitudes, dtype=complex).copy()
    if abs(np.linalg.norm(psi) - 1.0) > 1e-8:
        raise ConfigError("psi0 must be normalized")
    sz = np.array([-1.0, 1.0])
    n_steps = times.size - 1
    kets = np.empty((times.size, 2), dtype=complex)
    kets[0] = psi
    defects = np.empty(n_steps)
    values = np.empty(n_steps)
    inc = wiener.increments[:, 0]
    root_k = math.sqrt(k)
    for n in range(n_steps):
        ez = float(np.sum(sz * np.abs(psi) ** 2))
        values[n] = ez + inc[n] / (math.sqrt(4.0 * k) * h)
        op = sz - ez
        psi = psi + (-0.5 * k * h) * (op**2) * psi + root_k * inc[n] * (op * psi)
        nrm = np.linalg.norm(psi)
        if nrm == 0.0:
            raise SolverError("state norm vanished; step too large")
        defects[n] = abs(nrm - 1.0)
        psi = psi / nrm
        kets[n + 1] = psi
    traj = DiffusiveTrajectory(times=times, kets=kets, norm_defects=defects,
                               wiener=wiener)
    record = MeasurementRecord(times=times[:-1], values=values, strength=float(k))
    return traj, record


def solve_sme_z(k: float, rho0: DensityMatrix, times, rng=None,
                wiener: Optional[WienerPath] = None):
    """sigma_z-measurement SME; returns (list of DensityMatrix, record).

    One step applies M = a + b sigma_z with a = 1 - k h + k dY^2 / 2,
    b = sqrt(k) dY, where dY = dW + 2 sqrt(k) <sigma_z> h is the innovation
    (the record value is dY / (sqrt(4k) h)).  Expanding M rho M / tr to
    first order recovers the drift -(k/2)[sz,[sz,rho]] and the noise term
    sqrt(k)(sz rho + rho sz - 2<sz>rho).
    """
    times = np.asarray(times, dtype=float)
    h, wiener = _z_wiener(k, times, rng, wiener)
    if rho0.space.total != 2:
        raise ConfigError("sigma_z measurement is a two-level unraveling")
    rho = np.asarray(rho0.matrix, dtype=complex).copy()
    n_steps = times.size - 1
    mats = np.empty((times.size, 2, 2), dtype=complex)
    mats[0] = rho
    values = np.empty(n_steps)
    inc = wiener.increments[:, 0]
    root_k = math.sqrt(k)
    for n in range(n_steps):
        ez = float(rho[1, 1].real - rho[0, 0].real)
        values[n] = ez + inc[n] / (math.sqrt(4.0 * k) * h)
        dy = inc[n] + 2.0 * root_k * ez * h
        a = 1.0 - k * h + 0.5 * k * dy * dy
        b = root_k * dy
        m = np.array([a - b, a + b])  # diagonal of a*1 + b*sigma_z
        rho = m[:, None] * rho * m[None, :]
        tr = rho[0, 0].real + rho[1, 1].real
        if tr <= 0.0:
            raise SolverError("measurement operator collapsed the trace; "
                              f"reduce the step (k*h = {k * h:.3g})")
        rho = rho / tr
        rho = 0.5 * (rho + rho.conj().T)
        low = _eigmin_2x2(rho)
        if low < POSITIVITY_ABORT:
            raise SolverError(
                f"positivity excursion {low:.2e} at step {n}; "
                f"reduce the step (k*h = {k * h:.3g})"
            )
        mats[n + 1] = rho
    space = rho0.space
    states = [DensityMatrix(m, space, trace_tol=1e-9, positivity_tol=2e-6)
              for m in mats]
    record = MeasurementRecord(times=times[:-1], values=values, strength=float(k))
    return states, record


def _eigmin_2x2(rho: np.ndarray) -> float:
    tr = rho[0, 0].real + rho[1, 1].real
    det = (rho[0, 0] * rho[1, 1] - rho[0, 1] * rho[1, 0]).real
    disc = max(tr * tr - 4.0 * det, 0.0)
    return 0.5 * (tr - math.sqrt(disc))


@dataclasses.dataclass(frozen=True)
class ZEnsemble:
    """Path statistics for the measurement unravelings."""

    times: np.ndarray
    mean_sz: np.ndarray
    se_sz: np.ndarray
    final_sz: np.ndarray
    n_paths: int
    mean_abs_coherence: Optional[np.ndarray] = None
    se_abs_coherence: Optional[np.ndarray] = None


def sse_z_ensemble(k: float, psi0: Ket, times, n_paths: int, master_seed: int
                   ) -> ZEnsemble:
    """Vectorized measurement-SSE ensemble (per-path Philox streams)."""
    if n_paths < 1:
        raise ConfigError("n_paths must be >= 1")
    times = np.asarray(times, dtype=float)
    h = _uniform_step(times)
    if k <= 0:
        raise ConfigError("measurement strength k must be positive")
    if psi0.space.total != 2:
        raise ConfigError("sigma_z measurement is a two-level unraveling")
    if k * h > KH_WARN:
        warnings.warn(f"k*h = {k * h:.3g} exceeds {KH_WARN}; refine the grid",
                      stacklevel=2)
    n_steps = times.size - 1
    inc = _ensemble_increments(master_seed, n_paths, n_steps, h, False)
    sz = np.array([-1.0, 1.0])
    psi = np.broadcast_to(np.asarray(psi0.amplitudes, dtype=complex),
                          (n_paths, 2)).copy()
    mean_sz = np.empty(times.size)
    se_sz = np.empty(times.size)
    root_k = math.sqrt(k)

    def stats(i, batch):
        ez = np.sum(sz * np.abs(batch) ** 2, axis=1)
        mean_sz[i] = ez.mean()
        se_sz[i] = ez.std(ddof=1) / math.sqrt(n_paths) if n_paths > 1 else 0.0
        return ez

    stats(0, psi)
    for n in range(n_steps):
        ez = np.sum(sz * np.abs(psi) ** 2, axis=1)
        op = sz[None, :] - ez[:, None]
        psi = psi + (-0.5 * k * h) * (op**2) * psi \
            + root_k * inc[:, n, None] * (op * psi)
        psi = psi / np.linalg.norm(psi, axis=1, keepdims=True)
        stats(n + 1, psi)
    final = np.sum(sz * np.abs(psi) ** 2, axis=1)
    return ZEnsemble(times=times, mean_sz=mean_sz, se_sz=se_sz,
                     final_sz=final, n_paths=n_paths)


def sme_z_ensemble(k: float, rho0: DensityMatrix, times, n_paths: int,
                   master_seed: int) -> ZEnsemble:
    """Vectorized measurement-SME ensemble tracking coherence statistics."""
    if n_paths < 1:
        raise ConfigError("n_paths must be >= 1")
    times = np.asarray(times, dtype=float)
    h = _uniform_step(times)
    if k <= 0:
        raise ConfigError("measurement strength k must be positive")
    if rho0.space.total != 2:
        raise ConfigError("sigma_z measurement is a two-level unraveling")
    if k * h > KH_WARN:
        warnings.warn(f"k*h = {k * h:.3g} exceeds {KH_WARN}; refine the grid",
                      stacklevel=2)
    n_steps = times.size - 1
    inc = _ensemble_increments(master_seed, n_paths, n_steps, h, False)
    rho = np.broadcast_to(np.asarray(rho0.matrix, dtype=complex),
                          (n_paths, 2, 2)).copy()
    mean_sz = np.empty(times.size)
    se_sz = np.empty(times.size)
    mean_c = np.empty(times.size)
    se_c = np.empty(times.size)
    root_k = math.sqrt(k)

    def stats(i, batch):
        ez = batch[:, 1, 1].real - batch[:, 0, 0].real
        mean_sz[i] = ez.mean()
        se_sz[i] = ez.std(ddof=1) / math.sqrt(n_paths) if n_paths > 1 else 0.0
        ac = np.abs(batch[:, 0, 1])
        mean_c[i] = ac.mean()
        se_c[i] = ac.std(ddof=1) / math.sqrt(n_paths) if n_paths > 1 else 0.0

    stats(0, rho)
    for n in range(n_steps):
        ez = rho[:, 1, 1].real - rho[:, 0, 0].real
        dy = inc[:, n] + 2.0 * root_k * ez * h
        a = 1.0 - k * h + 0.5 * k * dy * dy
        b = root_k * dy
        m = np.stack([a - b, a + b], axis=1)  # (paths, 2) diagonal of M
        rho = m[:, :, None] * rho * m[:, None, :]
        tr = rho[:, 0, 0].real + rho[:, 1, 1].real
        if tr.min() <= 0.0:
            raise SolverError("measurement operator collapsed the trace; "
                              f"reduce the step (k*h = {k * h:.3g})")
        rho = rho / tr[:, None, None]
        det = (rho[:, 0, 0] * rho[:, 1, 1] - rho[:, 0, 1] * rho[:, 1, 0]).real
        low = 0.5 * (1.0 - np.sqrt(np.maximum(1.0 - 4.0 * det, 0.0)))
        worst = float(low.min())
        if worst < POSITIVITY_ABORT:
            raise SolverError(
                f"positivity excursion {worst:.2e} at step {n}; "
                f"reduce the step (k*h = {k * h:.3g})"
            )
        stats(n + 1, rho)
    final = rho[:, 1, 1].real - rho[:, 0, 0].real
    return ZEnsemble(times=times, mean_sz=mean_sz, se_sz=se_sz,
                     final_sz=final, n_paths=n_paths,
                     mean_abs_coherence=mean_c, se_abs_coherence=se_c)
