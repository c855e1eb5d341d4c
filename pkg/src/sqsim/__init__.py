"""Open-system dynamics toolkit for superconducting qubits.

Dense-matrix solvers for small Hilbert spaces: Lindblad and Bloch-Redfield
master equations, Monte Carlo wave function trajectories, Floquet-Markov
dynamics under periodic driving, a post-Markovian master equation with
memory kernels, and diffusive stochastic trajectories for continuous
measurement.  Circuit Hamiltonians (Cooper-pair box / transmon, fluxonium,
Jaynes-Cummings), golden-rule decoherence rates from noise spectra, and
input-output cavity response round out the stack.

The submodules are usable on their own; this namespace just re-exports the
entry points most scripts need.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConvergenceError,
    FitError,
    InvariantViolation,
    SingularSpectrumError,
    SolverError,
)
from .core import (
    DensityMatrix,
    HilbertSpace,
    Ket,
    Operator,
    Superoperator,
    basis_ket,
    create,
    destroy,
    expectation,
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
)
from .circuits import (
    CircuitParams,
    cpb_hamiltonian,
    cpb_spectrum,
    fluxonium_hamiltonian,
    fluxonium_spectrum,
    jc_hamiltonian,
    qubit_parameters,
    schrieffer_wolff,
    spectrum,
)
from .noise import NoiseSpectrum, circuit_sensitivity, golden_rule_rates, sensitivity
from .lindblad import LindbladModel, decoherence_times, qubit_channels, solve_lindblad
from .redfield import CouplingSpec, br_tensor, solve_br
from .mcwf import JumpModel, ensemble_average, evolve_trajectory
from .floquet import (
    floquet_couplings,
    floquet_modes,
    floquet_rates,
    solve_floquet_markov,
)
from .nonmarkov import MemoryKernel, PMMEModel, solve_pmme
from .stochastic import (
    WienerPath,
    sme_z_ensemble,
    solve_sme_z,
    solve_sse_markov,
    solve_sse_z,
    sse_z_ensemble,
)
from .inout import (
    CavityPort,
    DriveTone,
    dispersive_readout_curve,
    reflection_coefficient,
    steady_state_amplitude,
)
from .analysis import FitResult, bloch_vector, fit_T1, fit_T2_ramsey, trace_distance
