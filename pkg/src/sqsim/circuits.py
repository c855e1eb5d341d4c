"""Superconducting-circuit Hamiltonians and their dispersive reduction.

Charge-basis and phase-grid builders return dense Hermitian `Operator`s;
the companion ``*_spectrum`` helpers diagonalize the same tridiagonal
problems directly (cheap even on very fine grids).  Energies are angular
frequencies with hbar = 1, like everything else in this package.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import (
    HilbertSpace,
    Operator,
    create,
    destroy,
    identity,
    number_op,
    qubit_space,
    sigma_minus,
    sigma_plus,
    sigma_z,
    tensor,
)
from .errors import ConfigError

__all__ = [
    "CircuitParams",
    "SpectrumResult",
    "QubitParameters",
    "DispersiveModel",
    "cpb_hamiltonian",
    "cpb_spectrum",
    "fluxonium_hamiltonian",
    "fluxonium_spectrum",
    "spectrum",
    "qubit_parameters",
    "jc_hamiltonian",
    "multilevel_coupling",
    "schrieffer_wolff",
]


@dataclass(frozen=True)
class CircuitParams:
    """Circuit energy scales and external biases.

    Parameters
    ----------
    e_c : float
        Charging energy, > 0.
    e_j : float
        Josephson energy, >= 0.
    e_l : float
        Inductive energy, >= 0.  Zero selects the charge-basis family.
    n_ext : float
        Offset charge in Cooper-pair units.
    phi_ext : float
        External flux phase bias.
    """

    e_c: float
    e_j: float
    e_l: float = 0.0
    n_ext: float = 0.0
    phi_ext: float = 0.0

    def __post_init__(self):
        for name in ("e_c", "e_j", "e_l", "n_ext", "phi_ext"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise ConfigError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)
        if self.e_c <= 0.0:
            raise ConfigError(f"e_c must be positive, got {self.e_c}")
        if self.e_j < 0.0:
            raise ConfigError(f"e_j must be non-negative, got {self.e_j}")
        if self.e_l < 0.0:
            raise ConfigError(f"e_l must be non-negative, got {self.e_l}")


@dataclass(frozen=True)
class SpectrumResult:
    """Sorted eigenenergies of a circuit Hamiltonian."""

    energies: np.ndarray

    def __post_init__(self):
        e = np.array(self.energies, dtype=float, copy=True)
        if e.ndim != 1 or e.size < 2:
            raise ValueError("need at least two energies")
        if np.any(np.diff(e) < -1e-12 * max(1.0, float(np.abs(e).max()))):
            raise ValueError("energies must be sorted ascending")
        e.flags.writeable = False
        object.__setattr__(self, "energies", e)


@dataclass(frozen=True)
class QubitParameters:
    """Transition frequency and anharmonicity extracted from a spectrum."""

    omega_q: float
    anharmonicity: float


def _cpb_tridiagonal(params: CircuitParams, ncut: int):
    if params.e_l != 0.0:
        raise ConfigError(
            "charge-basis Hamiltonian requires e_l = 0; use the phase-grid builder for inductive circuits"
        )
    if ncut < 1:
        raise ConfigError(f"ncut must be >= 1, got {ncut}")
    n = np.arange(-ncut, ncut + 1, dtype=float)
    diag = 4.0 * params.e_c * (n - params.n_ext) ** 2
    off = np.full(2 * ncut, -params.e_j / 2.0)
    return diag, off


def cpb_hamiltonian(params: CircuitParams, ncut: int) -> Operator:
    """Cooper-pair-box / transmon Hamiltonian in the charge basis.

    Basis states are charge eigenstates n in [-ncut, ncut].  The diagonal
    carries 4 E_C (n - n_ext)^2 and nearest neighbors couple with -E_J/2.

    Parameters
    ----------
    params : CircuitParams
        Must have e_l = 0.
    ncut : int
        Charge cutoff; the matrix side is 2*ncut + 1.
    """
    diag, off = _cpb_tridiagonal(params, ncut)
    mat = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    return Operator(mat, HilbertSpace((2 * ncut + 1,)))


def cpb_spectrum(params: CircuitParams, ncut: int, nlevels: int = 3) -> SpectrumResult:
    """Lowest eigenenergies of the charge-basis Hamiltonian."""
    diag, off = _cpb_tridiagonal(params, ncut)
    nlevels = min(int(nlevels), diag.size)
    vals = scipy.linalg.eigh_tridiagonal(
        diag, off, select="i", select_range=(0, nlevels - 1), eigvals_only=True
    )
    return SpectrumResult(vals)


def _fluxonium_grid(phi_min: float, phi_max: float, points: int) -> np.ndarray:
    if points < 64:
        raise ConfigError(f"phase grid needs at least 64 points, got {points}")
    if not phi_max > phi_min:
        raise ConfigError("phi_max must exceed phi_min")
    return np.linspace(phi_min, phi_max, points)


def _fluxonium_tridiagonal(params: CircuitParams, phi: np.ndarray):
    if params.e_l <= 0.0:
        raise ConfigError("phase-grid Hamiltonian requires e_l > 0")
    h = phi[1] - phi[0]
    potential = 0.5 * params.e_l * phi ** 2 - params.e_j * np.cos(phi - params.phi_ext)
    # kinetic term 4 E_C N^2 with N = -i d/dphi, central second differences,
    # hard-wall boundaries outside the grid
    diag = 8.0 * params.e_c / h ** 2 + potential
    off = np.full(phi.size - 1, -4.0 * params.e_c / h ** 2)
    if potential.argmin() <= 0.05 * phi.size or potential.argmin() >= 0.95 * phi.size:
        warnings.warn(
            "potential minimum sits at the edge of the phase grid; widen [phi_min, phi_max]",
            stacklevel=3,
        )
    return diag, off


def fluxonium_hamiltonian(
    params: CircuitParams,
    phi_min: float = -6.0 * np.pi,
    phi_max: float = 6.0 * np.pi,
    points: int = 1201,
) -> Operator:
    """Fluxonium Hamiltonian discretized on a uniform phase grid.

    H = 4 E_C N^2 + (1/2) E_L phi^2 - E_J cos(phi - phi_ext), with the
    kinetic term as a second-order central difference and hard-wall
    boundaries.  Warns when the potential minimum touches the grid edge.
    """
    phi = _fluxonium_grid(phi_min, phi_max, points)
    diag, off = _fluxonium_tridiagonal(params, phi)
    mat = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    return Operator(mat, HilbertSpace((points,)))


def fluxonium_spectrum(
    params: CircuitParams,
    phi_min: float = -6.0 * np.pi,
    phi_max: float = 6.0 * np.pi,
    points: int = 1201,
    nlevels: int = 3,
) -> SpectrumResult:
    """Lowest eigenenergies of the phase-grid Hamiltonian.

    Solves the tridiagonal eigenproblem directly, so grids with tens of
    thousands of points stay cheap; use this for convergence studies.
    """
    phi = _fluxonium_grid(phi_min, phi_max, points)
    diag, off = _fluxonium_tridiagonal(params, phi)
    nlevels = min(int(nlevels), diag.size)
    vals = scipy.linalg.eigh_tridiagonal(
        diag, off, select="i", select_range=(0, nlevels - 1), eigvals_only=True
    )
    return SpectrumResult(vals)


def spectrum(h: Operator, nlevels: int | None = None) -> SpectrumResult:
    """Sorted eigenenergies of a Hermitian operator."""
    if not h.is_hermitian():
        raise ValueError("spectrum requires a Hermitian operator")
    vals = np.linalg.eigvalsh(h.matrix)
    if nlevels is not None:
        vals = vals[: int(nlevels)]
    return SpectrumResult(vals)


def qubit_parameters(spec: SpectrumResult) -> QubitParameters:
    """Qubit frequency E1 - E0 and anharmonicity (E2 - E1) - (E1 - E0)."""
    e = spec.energies
    if e.size < 3:
        raise ValueError("need at least three levels for the anharmonicity")
    return QubitParameters(
        omega_q=float(e[1] - e[0]),
        anharmonicity=float((e[2] - e[1]) - (e[1] - e[0])),
    )


def jc_hamiltonian(omega_c: float, omega_q: float, g: float, nmax: int) -> Operator:
    """Qubit-cavity Hamiltonian with rotating-wave coupling.

    H = omega_c (a^dag a + 1/2) + (omega_q/2) sigma_z + g (a^dag sigma_- +
    sigma_+ a) on the cavity (x) qubit product space, cavity factor first,
    Fock states truncated at nmax photons.
    """
    cav = HilbertSpace((nmax + 1,))
    h = (
        omega_c * tensor(Operator(number_op(nmax).matrix + 0.5 * np.eye(nmax + 1), cav),
                         identity(qubit_space()))
        + (omega_q / 2.0) * tensor(identity(cav), sigma_z())
        + g * (tensor(create(nmax), sigma_minus()) + tensor(destroy(nmax), sigma_plus()))
    )
    return h


def multilevel_coupling(
    omega_r: float,
    level_energies,
    g,
    nmax: int,
) -> Operator:
    """Resonator coupled to a multilevel atom.

    H = omega_r a^dag a + sum_j omega_j |j><j|
      + sum_ij (g_ij |i><j| a^dag + conj(g_ij) |j><i| a)

    Each supplied g_ij is paired with its conjugate transpose term, so the
    Hamiltonian is Hermitian for any square complex g.  A one-sided matrix
    (only g[0, 1] set, say) gives the rotating-wave pairing that reduces to
    `jc_hamiltonian`; filling both g[i, j] and g[j, i] adds the
    counter-rotating partner as well.

    Parameters
    ----------
    omega_r : float
        Resonator frequency.
    level_energies : array_like
        Atomic level energies omega_j, ascending.
    g : array_like
        Square coupling matrix over the atomic levels.
    nmax : int
        Photon cutoff.
    """
    omega = np.asarray(level_energies, dtype=float)
    gmat = np.asarray(g, dtype=complex)
    nlev = omega.size
    if gmat.shape != (nlev, nlev):
        raise ConfigError(f"coupling matrix shape {gmat.shape} does not match {nlev} levels")
    cav = HilbertSpace((nmax + 1,))
    atom = HilbertSpace((nlev,))
    h = tensor(number_op(nmax) * omega_r, identity(atom)) + tensor(
        identity(cav), Operator(np.diag(omega), atom)
    )
    a_dag = create(nmax)
    a_op = destroy(nmax)
    hint = np.zeros(((nmax + 1) * nlev, (nmax + 1) * nlev), dtype=complex)
    for i in range(nlev):
        for j in range(nlev):
            if gmat[i, j] == 0.0:
                continue
            proj = np.zeros((nlev, nlev), dtype=complex)
            proj[i, j] = 1.0
            term = gmat[i, j] * np.kron(a_dag.matrix, proj)
            hint += term + term.conj().T
    return h + Operator(hint, h.space)


@dataclass(frozen=True)
class DispersiveModel:
    """Second-order dispersive reduction of a resonator-coupled atom.

    ``chi_matrix[a, b]`` is the partial shift |g[b, a]|^2 /
    (omega_a - omega_b - omega_r); `lamb_shifts` are its row sums, and
    `cavity_pulls` the photon-number-dependent pulls per atomic level.
    `chi` is the qubit dispersive shift (cavity_pulls[1] - cavity_pulls[0])/2.
    """

    chi_matrix: np.ndarray
    lamb_shifts: np.ndarray
    cavity_pulls: np.ndarray
    omega_r_dressed: float
    omega_q_dressed: float
    chi: float

    def __post_init__(self):
        for name in ("chi_matrix", "lamb_shifts", "cavity_pulls"):
            arr = np.array(getattr(self, name), dtype=float, copy=True)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def schrieffer_wolff(
    level_energies,
    g,
    omega_r: float,
    validity_threshold: float = 10.0,
) -> DispersiveModel:
    """Dispersive-limit parameters from second-order perturbation theory.

    The level-a energy acquires Lambda_a + n * chi_a at photon number n,
    where chi_matrix[a, b] = |g[b, a]|^2 / (omega_a - omega_b - omega_r),
    Lambda_a = sum_b chi_matrix[a, b] and chi_a = sum_b (chi_matrix[a, b]
    - chi_matrix[b, a]).  The dressed resonator and qubit frequencies and
    the qubit dispersive shift chi follow from the two lowest levels.

    Raises
    ------
    ConfigError
        When some coupled pair violates |omega_a - omega_b - omega_r| >
        validity_threshold * |g[b, a]| (dispersive regime check).
    """
    omega = np.asarray(level_energies, dtype=float)
    gmat = np.asarray(g, dtype=complex)
    nlev = omega.size
    if nlev < 2:
        raise ConfigError("need at least two atomic levels")
    if gmat.shape != (nlev, nlev):
        raise ConfigError(f"coupling matrix shape {gmat.shape} does not match {nlev} levels")
    chi = np.zeros((nlev, nlev))
    for a in range(nlev):
        for b in range(nlev):
            if a == b or gmat[b, a] == 0.0:
                continue
            denom = omega[a] - omega[b] - omega_r
            if abs(denom) <= validity_threshold * abs(gmat[b, a]):
                raise ConfigError(
                    f"dispersive validity violated for levels ({a}, {b}): "
                    f"|detuning| = {abs(denom):.4g} <= {validity_threshold:g} * |g| = "
                    f"{validity_threshold * abs(gmat[b, a]):.4g}"
                )
            chi[a, b] = abs(gmat[b, a]) ** 2 / denom
    lamb = chi.sum(axis=1)
    pulls = chi.sum(axis=1) - chi.sum(axis=0)
    omega_r_dressed = omega_r + 0.5 * (pulls[0] + pulls[1])
    omega_q_dressed = (omega[1] - omega[0]) + (lamb[1] - lamb[0])
    return DispersiveModel(
        chi_matrix=chi,
        lamb_shifts=lamb,
        cavity_pulls=pulls,
        omega_r_dressed=float(omega_r_dressed),
        omega_q_dressed=float(omega_q_dressed),
        chi=float(0.5 * (pulls[1] - pulls[0])),
    )
