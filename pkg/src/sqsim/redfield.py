"""Bloch-Redfield relaxation tensor with a secular filter.

The system couples to independent baths through Hermitian operators A_k,
each with its own power spectrum S_k(w) (no cross-correlations).  In the
energy eigenbasis the tensor reads

R_abcd = -1/2 sum_k ( delta_bd sum_n A_an A_nc S_k(w_cn)
                      - A_ac A_db S_k(w_ca)
                      + delta_ac sum_n A_dn A_nb S_k(w_dn)
                      - A_ac A_db S_k(w_db) )

with w_mn = E_m - E_n, and the coherence at (a, b) obeys

d rho_ab / dt = -i w_ab rho_ab + sum_{cd}^{sec} R_abcd rho_cd.

The secular filter drops tensor entries with |w_ab - w_cd| above a cutoff
(default: 0.1 times the smallest nonzero gap between transition
frequencies); cutoff = inf keeps everything, in which case transient
positivity excursions are possible and are reported in the diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import DensityMatrix, Operator
from .errors import ConfigError, InvariantViolation
from .lindblad import EvolutionResult, _check_times, _observable_series
from .noise import NoiseSpectrum

__all__ = ["CouplingSpec", "BRTensor", "br_tensor", "solve_br"]

TRACE_ANNIHILATION_TOL = 1e-12
HERMITICITY_PRESERVATION_TOL = 1e-9


@dataclass(frozen=True)
class CouplingSpec:
    """Hermitian system operators paired with their bath spectra.

    Cross-correlations between different baths are not modeled; passing
    `cross_spectra` is rejected so the omission is explicit.
    """

    couplings: tuple
    cross_spectra: None = None

    def __post_init__(self):
        if self.cross_spectra is not None:
            raise ConfigError("cross-correlated baths are not supported; leave cross_spectra unset")
        pairs = tuple(self.couplings)
        if len(pairs) == 0:
            raise ConfigError("need at least one (operator, spectrum) pair")
        dims = None
        for op, spec in pairs:
            if not isinstance(op, Operator) or not isinstance(spec, NoiseSpectrum):
                raise ConfigError("couplings must pair Operator with NoiseSpectrum")
            if not op.is_hermitian():
                raise ConfigError("bath coupling operators must be Hermitian")
            if dims is None:
                dims = op.space.dims
            elif op.space.dims != dims:
                raise ConfigError("all coupling operators must share one space")
        object.__setattr__(self, "couplings", pairs)


@dataclass(frozen=True)
class BRTensor:
    """Relaxation tensor in the energy eigenbasis, plus the basis itself."""

    tensor: np.ndarray          # rank 4, secular filter already applied
    energies: np.ndarray        # ascending eigenvalues
    eigenbasis: np.ndarray      # columns are eigenvectors in the input basis
    secular_cutoff: float
    nonsecular: bool

    def __post_init__(self):
        for name in ("tensor", "energies", "eigenbasis"):
            arr = np.array(getattr(self, name), copy=True)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def dim(self) -> int:
        return self.energies.size


def br_tensor(
    h: Operator,
    coupling: CouplingSpec,
    secular_cutoff: float | None = None,
) -> BRTensor:
    """Build the secular-filtered relaxation tensor for H and its baths.

    Parameters
    ----------
    h : Operator
        System Hamiltonian (Hermitian).
    coupling : CouplingSpec
    secular_cutoff : float, optional
        Keep entries with |w_ab - w_cd| <= cutoff.  None picks 0.1 times
        the smallest nonzero gap between transition frequencies; numpy.inf
        disables the filter (flagged on the result).

    The returned tensor annihilates the trace column by column; that
    structural identity is asserted to 1e-12.
    """
    if not h.is_hermitian():
        raise ConfigError("br_tensor requires a Hermitian Hamiltonian")
    if coupling.couplings[0][0].space.dims != h.space.dims:
        raise ConfigError("coupling operators live on a different space than H")
    evals, evecs = np.linalg.eigh(h.matrix)
    n = evals.size
    omega = evals[:, None] - evals[None, :]          # w_mn = E_m - E_n

    terms = []
    for op, spec in coupling.couplings:
        a_eig = evecs.conj().T @ op.matrix @ evecs
        s_mat = np.asarray(spec(omega.reshape(-1))).reshape(n, n)
        terms.append((a_eig, s_mat))

    r = np.zeros((n, n, n, n), dtype=complex)
    for a_eig, s in terms:
        # delta_bd sum_n A_an A_nc S(w_cn)
        sum1 = np.einsum("an,nc,cn->ac", a_eig, a_eig, s)
        # delta_ac sum_n A_dn A_nb S(w_dn)
        sum2 = np.einsum("dn,nb,dn->db", a_eig, a_eig, s)
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    for d in range(n):
                        val = 0.0j
                        if b == d:
                            val += sum1[a, c]
                        val -= a_eig[a, c] * a_eig[d, b] * s[c, a]
                        if a == c:
                            val += sum2[d, b]
                        val -= a_eig[a, c] * a_eig[d, b] * s[d, b]
                        r[a, b, c, d] += -0.5 * val

    # secular filter on |w_ab - w_cd|
    gap = omega[:, :, None, None] - omega[None, None, :, :]
    if secular_cutoff is None:
        nz = np.abs(gap[np.abs(gap) > 1e-12 * max(1.0, float(np.abs(evals).max()))])
        cutoff = 0.1 * float(nz.min()) if nz.size else 0.0
        nonsecular = False
    else:
        cutoff = float(secular_cutoff)
        nonsecular = np.isinf(cutoff)
    scale = max(1.0, float(np.abs(evals).max()))
    mask = np.abs(gap) <= cutoff + 1e-12 * scale
    r = np.where(mask, r, 0.0)

    col_sums = np.einsum("aacd->cd", r)
    defect = float(np.abs(col_sums).max())
    if defect > TRACE_ANNIHILATION_TOL * max(1.0, float(np.abs(r).max())):
        raise InvariantViolation(
            f"relaxation tensor fails trace annihilation by {defect:.3e}"
        )
    return BRTensor(
        tensor=r,
        energies=evals,
        eigenbasis=evecs,
        secular_cutoff=cutoff,
        nonsecular=bool(nonsecular),
    )


def solve_br(
    tensor: BRTensor,
    rho0: DensityMatrix,
    times,
    observables: dict | None = None,
    store_states: bool = True,
) -> EvolutionResult:
    """Evolve a state under the Redfield generator.

    The density matrix is rotated into the energy eigenbasis, evolved with
    the dense generator (coherent -i w_ab part plus the filtered tensor)
    using matrix-exponential stepping, and rotated back for reporting.
    Hermiticity must be preserved to 1e-9 along the way; the most negative
    transient eigenvalue is reported in the diagnostics (relevant in
    non-secular mode).
    """
    times = _check_times(times)
    n = tensor.dim
    if rho0.space.total != n:
        raise ConfigError("initial state dimension does not match the tensor")
    omega = tensor.energies[:, None] - tensor.energies[None, :]
    gen = np.zeros((n * n, n * n), dtype=complex)
    # index (a, b) -> a + n * b, matching column-stacking vec()
    idx = lambda a, b: a + n * b
    for a in range(n):
        for b in range(n):
            gen[idx(a, b), idx(a, b)] += -1j * omega[a, b]
            for c in range(n):
                for d in range(n):
                    gen[idx(a, b), idx(c, d)] += tensor.tensor[a, b, c, d]

    v = tensor.eigenbasis
    rho_eig = v.conj().T @ rho0.matrix @ v
    y = rho_eig.reshape(-1, order="F")
    props = {dt: scipy.linalg.expm(gen * dt) for dt in np.unique(np.diff(times))}
    raw_eig = [rho_eig]
    for dt in np.diff(times):
        y = props[dt] @ y
        raw_eig.append(y.reshape((n, n), order="F"))

    herm_defect = max(float(np.abs(m - m.conj().T).max()) for m in raw_eig)
    if herm_defect > HERMITICITY_PRESERVATION_TOL:
        raise InvariantViolation(
            f"Redfield evolution broke Hermiticity by {herm_defect:.3e}"
        )
    raw = [v @ m @ v.conj().T for m in raw_eig]
    traces = np.array([np.trace(m).real for m in raw])
    sym = [(m + m.conj().T) / 2.0 for m in raw]
    min_eig = min(float(np.linalg.eigvalsh(m).min()) for m in sym)
    diagnostics = {
        "trace_drift": float(np.abs(traces - 1.0).max()),
        "min_eigenvalue": min_eig,
        "hermiticity_defect": herm_defect,
        "secular_cutoff": tensor.secular_cutoff,
        "nonsecular": tensor.nonsecular,
    }
    states = None
    if store_states:
        pos_tol = 1e-7 if not tensor.nonsecular else max(1e-7, 2.0 * abs(min(min_eig, 0.0)))
        states = [
            DensityMatrix(m, rho0.space, trace_tol=1e-7, positivity_tol=pos_tol)
            for m in sym
        ]
    return EvolutionResult(
        times=times,
        states=states,
        expectations=_observable_series(sym, observables),
        diagnostics=diagnostics,
    )
