"""Config-driven command line: parse a JSON experiment spec, dispatch to a
solver, and emit reproducible CSV/JSON artifacts.

Subcommands
-----------
simulate   time evolution under any of the seven solver families
circuit    circuit spectra, qubit parameters, optional dispersive reduction
rates      sensitivity coefficients and golden-rule decay rates
floquet    quasienergy table for a driven system, plus Floquet rates
readout    dispersive reflection curves from closed forms (flag-driven)

The config is strict: unknown keys are rejected with their dotted path, the
schema is versioned, and a fixed seed makes every run byte-reproducible
(CSV values are written with 17 significant digits and Unix newlines).
Exit codes: 0 success, 2 config error, 3 solver/fit error, 4 invariant
violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

import numpy as np

from . import __version__
from . import analysis, circuits, floquet, inout, lindblad, mcwf, noise
from . import nonmarkov, redfield, stochastic
from .core import (DensityMatrix, HilbertSpace, Ket, Operator, basis_ket,
                   sigma_minus, sigma_plus, sigma_x, sigma_y, sigma_z)
from .errors import (ConfigError, ConvergenceError, FitError,
                     InvariantViolation, SingularSpectrumError, SolverError)

SCHEMA_VERSION = 1
SOLVER_NAMES = ("lindblad", "redfield", "mcwf", "floquet", "pmme", "sse", "sme")
STOCHASTIC_SOLVERS = ("mcwf", "sse", "sme")

_NAMED_OPS = {
    "sigma_x": sigma_x,
    "sigma_y": sigma_y,
    "sigma_z": sigma_z,
    "sigma_minus": sigma_minus,
    "sigma_plus": sigma_plus,
}


# -- config primitives -------------------------------------------------


def _ensure_object(node, path):
    if not isinstance(node, dict):
        raise ConfigError(f"{path or 'config'}: expected an object")
    return node


def _check_keys(node, path, required, optional=()):
    _ensure_object(node, path)
    allowed = set(required) | set(optional)
    prefix = f"{path}." if path else ""
    for key in node:
        if key not in allowed:
            raise ConfigError(f"unknown key {prefix}{key}")
    for key in required:
        if key not in node:
            raise ConfigError(f"missing required key {prefix}{key}")


def _number(node, path):
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ConfigError(f"{path}: expected a number")
    return float(node)


def _integer(node, path, minimum=None):
    if isinstance(node, bool) or not isinstance(node, int):
        raise ConfigError(f"{path}: expected an integer")
    if minimum is not None and node < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}")
    return int(node)


def _string(node, path, choices=None):
    if not isinstance(node, str):
        raise ConfigError(f"{path}: expected a string")
    if choices is not None and node not in choices:
        raise ConfigError(f"{path}: must be one of {', '.join(choices)}")
    return node


def _complex_entry(node, path):
    if isinstance(node, bool):
        raise ConfigError(f"{path}: expected a number or [re, im] pair")
    if isinstance(node, (int, float)):
        return complex(node)
    if (isinstance(node, list) and len(node) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                    for v in node)):
        return complex(node[0], node[1])
    raise ConfigError(f"{path}: expected a number or [re, im] pair")


def _matrix(node, path):
    if not isinstance(node, list) or not node:
        raise ConfigError(f"{path}: expected a nested list matrix")
    rows = []
    for i, row in enumerate(node):
        if not isinstance(row, list) or len(row) != len(node):
            raise ConfigError(f"{path}: must be square")
        rows.append([_complex_entry(v, f"{path}[{i}][{j}]")
                     for j, v in enumerate(row)])
    return np.array(rows, dtype=complex)


def _vector(node, path):
    if not isinstance(node, list) or not node:
        raise ConfigError(f"{path}: expected a list of amplitudes")
    return np.array([_complex_entry(v, f"{path}[{i}]")
                     for i, v in enumerate(node)], dtype=complex)


def _operator(node, path, space):
    """Named Pauli or explicit matrix, validated against the space."""
    if isinstance(node, str):
        if node not in _NAMED_OPS:
            raise ConfigError(
                f"{path}: unknown operator {node!r}; choices are "
                + ", ".join(sorted(_NAMED_OPS)) + " or a matrix")
        if space.total != 2:
            raise ConfigError(f"{path}: {node} needs a two-level system")
        return _NAMED_OPS[node]()
    mat = _matrix(node, path)
    if mat.shape[0] != space.total:
        raise ConfigError(f"{path}: matrix is {mat.shape[0]}x{mat.shape[0]} "
                          f"but the system dimension is {space.total}")
    return Operator(mat, space)


# -- experiment spec ---------------------------------------------------


class ExperimentSpec:
    """Validated simulate config plus its canonical serialization."""

    def __init__(self, raw: dict):
        _check_keys(raw, "", ("schema", "system", "solver", "grid"),
                    ("noise", "observables", "initial", "seed", "output"))
        if _integer(raw["schema"], "schema") != SCHEMA_VERSION:
            raise ConfigError(f"schema: unsupported version {raw['schema']} "
                              f"(this build reads {SCHEMA_VERSION})")
        self.raw = raw
        self.system = _ensure_object(raw["system"], "system")
        self.solver = _ensure_object(raw["solver"], "solver")
        self.grid = _ensure_object(raw["grid"], "grid")
        self.noise = raw.get("noise")
        self.observables = raw.get("observables")
        self.initial = raw.get("initial", "ground")
        self.seed = raw.get("seed")
        self.output = raw.get("output", {})
        if self.seed is not None:
            s = _integer(self.seed, "seed", minimum=0)
            if s >= 2**64:
                raise ConfigError("seed: must fit in 64 bits")
            self.seed = s
        _check_keys(self.output, "output", (),
                    ("csv", "summary", "record", "jumps"))
        for key, val in self.output.items():
            _string(val, f"output.{key}")
        self.solver_name = _string(self.solver.get("name", ""),
                                   "solver.name", choices=SOLVER_NAMES)

    def canonical(self) -> str:
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()


def parse_config(path: str) -> ExperimentSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno} "
                          f"column {exc.colno}: {exc.msg}")
    return ExperimentSpec(_ensure_object(raw, ""))


# -- builders ----------------------------------------------------------


def _build_system(sys_node: dict):
    """Return (h0: Operator, drive: dict | None, space)."""
    kind = _string(sys_node.get("type", ""), "system.type",
                   choices=("qubit", "matrix", "jc"))
    if kind == "qubit":
        _check_keys(sys_node, "system", ("type", "omega"), ("drive",))
        omega = _number(sys_node["omega"], "system.omega")
        space = HilbertSpace((2,))
        h0 = Operator(0.5 * omega * sigma_z().matrix, space)
    elif kind == "matrix":
        _check_keys(sys_node, "system", ("type", "h"), ("drive",))
        mat = _matrix(sys_node["h"], "system.h")
        space = HilbertSpace((mat.shape[0],))
        h0 = Operator(mat, space)
        if not h0.is_hermitian():
            raise ConfigError("system.h: matrix must be Hermitian")
    else:
        _check_keys(sys_node, "system",
                    ("type", "omega_c", "omega_q", "g", "nmax"), ("drive",))
        h0 = circuits.jc_hamiltonian(
            _number(sys_node["omega_c"], "system.omega_c"),
            _number(sys_node["omega_q"], "system.omega_q"),
            _number(sys_node["g"], "system.g"),
            _integer(sys_node["nmax"], "system.nmax", minimum=1),
        )
        space = h0.space
    drive = None
    if "drive" in sys_node:
        node = _ensure_object(sys_node["drive"], "system.drive")
        _check_keys(node, "system.drive",
                    ("amplitude", "frequency"), ("operator",))
        freq = _number(node["frequency"], "system.drive.frequency")
        if freq <= 0:
            raise ConfigError("system.drive.frequency: must be positive")
        op = _operator(node.get("operator", "sigma_x"),
                       "system.drive.operator", space)
        if not op.is_hermitian():
            raise ConfigError("system.drive.operator: must be Hermitian")
        drive = {
            "amplitude": _number(node["amplitude"], "system.drive.amplitude"),
            "frequency": freq,
            "operator": op,
        }
    return h0, drive, space


def _h_of_t(h0: Operator, drive):
    amp, freq, op = drive["amplitude"], drive["frequency"], drive["operator"]
    h0m, opm, space = h0.matrix, op.matrix, h0.space

    def h_t(t: float) -> Operator:
        return Operator(h0m + amp * np.cos(freq * t) * opm, space)

    return h_t


def _build_channels(noise_node, space):
    node = _ensure_object(noise_node, "noise")
    _check_keys(node, "noise", ("channels",))
    chans = node["channels"]
    if not isinstance(chans, list) or not chans:
        raise ConfigError("noise.channels: expected a non-empty list")
    out = []
    for i, ch in enumerate(chans):
        path = f"noise.channels[{i}]"
        _check_keys(ch, path, ("op", "rate"))
        rate = _number(ch["rate"], f"{path}.rate")
        if rate < 0:
            raise ConfigError(f"{path}.rate: must be non-negative")
        out.append((_operator(ch["op"], f"{path}.op", space), rate))
    return out


def _build_spectrum(node, path):
    _ensure_object(node, path)
    kind = _string(node.get("kind", ""), f"{path}.kind",
                   choices=("flat", "one_over_f", "dielectric", "tabulated"))
    if kind == "flat":
        _check_keys(node, path, ("kind", "s0"))
        return noise.NoiseSpectrum.flat(_number(node["s0"], f"{path}.s0"))
    if kind == "one_over_f":
        _check_keys(node, path, ("kind", "amplitude"))
        return noise.NoiseSpectrum.one_over_f(
            _number(node["amplitude"], f"{path}.amplitude"))
    if kind == "dielectric":
        _check_keys(node, path, ("kind", "amplitude", "temperature"))
        return noise.NoiseSpectrum.dielectric(
            _number(node["amplitude"], f"{path}.amplitude"),
            _number(node["temperature"], f"{path}.temperature"))
    _check_keys(node, path, ("kind", "omegas", "values"))
    omegas = [_number(v, f"{path}.omegas[{i}]")
              for i, v in enumerate(node["omegas"])]
    values = [_number(v, f"{path}.values[{i}]")
              for i, v in enumerate(node["values"])]
    return noise.NoiseSpectrum.tabulated(omegas, values)


def _build_spectral_noise(noise_node, space):
    node = _ensure_object(noise_node, "noise")
    _check_keys(node, "noise", ("spectrum", "coupling"))
    spectrum = _build_spectrum(node["spectrum"], "noise.spectrum")
    coupling = _operator(node["coupling"], "noise.coupling", space)
    if not coupling.is_hermitian():
        raise ConfigError("noise.coupling: must be Hermitian")
    return spectrum, coupling


def _build_grid(spec: ExperimentSpec):
    node = spec.grid
    _check_keys(node, "grid", ("t_end", "points"), ("t_start",))
    t0 = _number(node.get("t_start", 0.0), "grid.t_start")
    t1 = _number(node["t_end"], "grid.t_end")
    pts = _integer(node["points"], "grid.points", minimum=2)
    if t1 <= t0:
        raise ConfigError("grid.t_end: must exceed grid.t_start")
    return np.linspace(t0, t1, pts)


def _build_initial_ket(spec: ExperimentSpec, space) -> Ket:
    node = spec.initial
    if isinstance(node, str):
        named = {
            "ground": lambda: basis_ket(space, 0),
            "excited": lambda: basis_ket(space, 1),
            "plus": lambda: Ket(np.array([1.0, 1.0]) / np.sqrt(2.0), space),
            "minus": lambda: Ket(np.array([1.0, -1.0]) / np.sqrt(2.0), space),
        }
        if node not in named:
            raise ConfigError(f"initial: unknown state {node!r}; choices are "
                              + ", ".join(sorted(named)))
        if node in ("plus", "minus") and space.total != 2:
            raise ConfigError(f"initial: {node} needs a two-level system")
        return named[node]()
    _check_keys(node, "initial", (), ("ket", "matrix"))
    if "ket" in node:
        amps = _vector(node["ket"], "initial.ket")
        if amps.size != space.total:
            raise ConfigError("initial.ket: wrong dimension")
        nrm = np.linalg.norm(amps)
        if nrm <= 0:
            raise ConfigError("initial.ket: zero vector")
        return Ket(amps / nrm, space)
    raise ConfigError("initial: pure-state solvers need a named state or a ket")


def _build_initial_dm(spec: ExperimentSpec, space) -> DensityMatrix:
    node = spec.initial
    if isinstance(node, dict) and "matrix" in node:
        _check_keys(node, "initial", (), ("ket", "matrix"))
        mat = _matrix(node["matrix"], "initial.matrix")
        if mat.shape[0] != space.total:
            raise ConfigError("initial.matrix: wrong dimension")
        return DensityMatrix(mat, space)
    return _build_initial_ket(spec, space).dm()


def _build_observables(spec: ExperimentSpec, space):
    node = spec.observables
    if node is None:
        raise ConfigError("observables: required for this solver")
    if not isinstance(node, list) or not node:
        raise ConfigError("observables: expected a non-empty list")
    out = []
    for i, entry in enumerate(node):
        path = f"observables[{i}]"
        if isinstance(entry, str):
            name = entry
            if entry in ("sigma_x", "sigma_y", "sigma_z"):
                op = _operator(entry, path, space)
            elif entry in ("p_excited", "p_ground"):
                if space.total != 2:
                    raise ConfigError(f"{path}: {entry} needs a two-level system")
                idx = 1 if entry == "p_excited" else 0
                mat = np.zeros((2, 2), dtype=complex)
                mat[idx, idx] = 1.0
                op = Operator(mat, space)
            elif entry.startswith("population:"):
                try:
                    idx = int(entry.split(":", 1)[1])
                except ValueError:
                    raise ConfigError(f"{path}: bad population index")
                if not 0 <= idx < space.total:
                    raise ConfigError(f"{path}: population index out of range")
                mat = np.zeros((space.total, space.total), dtype=complex)
                mat[idx, idx] = 1.0
                op = Operator(mat, space)
            else:
                raise ConfigError(
                    f"{path}: unknown observable {entry!r}; use sigma_x/y/z, "
                    "p_excited, p_ground, population:K, or a named matrix")
        else:
            _check_keys(entry, path, ("name", "matrix"))
            name = _string(entry["name"], f"{path}.name")
            op = _operator(entry["matrix"], f"{path}.matrix", space)
        if not op.is_hermitian():
            raise ConfigError(f"{path}: observables must be Hermitian")
        if any(name == n for n, _ in out):
            raise ConfigError(f"{path}: duplicate observable name {name!r}")
        out.append((name, op))
    return out


# -- solver dispatch ---------------------------------------------------


def _solver_options(spec, required, optional):
    _check_keys(spec.solver, "solver", ("name",) + required, optional)
    return spec.solver


def _need_seed(spec: ExperimentSpec, override):
    seed = override if override is not None else spec.seed
    if seed is None:
        raise ConfigError("seed required for stochastic solvers")
    if not 0 <= seed < 2**64:
        raise ConfigError("seed: must fit in 64 bits")
    return int(seed)


def _run_lindblad(spec, times, args):
    opts = _solver_options(spec, (), ("method",))
    method = _string(opts.get("method", "rk"), "solver.method",
                     choices=("rk", "expm"))
    h0, drive, space = _build_system(spec.system)
    hamiltonian = _h_of_t(h0, drive) if drive else h0
    channels = _build_channels(spec.noise, space)
    obs = _build_observables(spec, space)
    model = lindblad.LindbladModel(hamiltonian, tuple(channels))
    rho0 = _build_initial_dm(spec, space)
    res = lindblad.solve_lindblad(model, rho0, times, observables=dict(obs),
                                  store_states=False, method=method)
    names = [n for n, _ in obs]
    cols = [np.asarray(res.expectations[n]).real for n in names]
    return names, cols, res.diagnostics, {}


def _run_redfield(spec, times, args):
    opts = _solver_options(spec, (), ("secular_cutoff",))
    cutoff = opts.get("secular_cutoff")
    if cutoff is not None:
        cutoff = np.inf if cutoff == "inf" else _number(
            cutoff, "solver.secular_cutoff")
    h0, drive, space = _build_system(spec.system)
    if drive:
        raise ConfigError("system.drive: not supported by the redfield solver")
    spectrum, coupling = _build_spectral_noise(spec.noise, space)
    obs = _build_observables(spec, space)
    tensor = redfield.br_tensor(
        h0, redfield.CouplingSpec(((coupling, spectrum),)),
        secular_cutoff=cutoff)
    rho0 = _build_initial_dm(spec, space)
    res = redfield.solve_br(tensor, rho0, times, observables=dict(obs),
                            store_states=False)
    names = [n for n, _ in obs]
    cols = [np.asarray(res.expectations[n]).real for n in names]
    return names, cols, res.diagnostics, {}


def _run_mcwf(spec, times, args):
    opts = _solver_options(spec, ("trajectories",), ())
    n_traj = args.trajectories or _integer(
        opts["trajectories"], "solver.trajectories", minimum=1)
    seed = _need_seed(spec, args.seed)
    h0, drive, space = _build_system(spec.system)
    hamiltonian = _h_of_t(h0, drive) if drive else h0
    channels = _build_channels(spec.noise, space)
    collapse = tuple(
        Operator(np.sqrt(rate) * op.matrix, space) for op, rate in channels)
    obs = _build_observables(spec, space)
    model = mcwf.JumpModel(hamiltonian, collapse)
    psi0 = _build_initial_ket(spec, space)
    res = mcwf.ensemble_average(model, psi0, times, n_traj, seed,
                                observables=dict(obs),
                                threads=max(args.threads, 1))
    names, cols = [], []
    for n, _ in obs:
        names += [n, f"{n}_se"]
        cols += [res.expectations[n], res.std_errors[n]]
    diag = {
        "n_trajectories": res.n_trajectories,
        "mean_jumps": res.jump_statistics["mean_total"],
        "per_channel_mean": list(res.jump_statistics["per_channel_mean"]),
    }
    jumps = [(tid, t, ch) for tid, rec in enumerate(res.jump_records)
             for t, ch in rec]
    return names, cols, diag, {"jumps": jumps}


def _run_floquet(spec, times, args):
    opts = _solver_options(spec, (), ("steps", "kmax"))
    steps = _integer(opts.get("steps", 256), "solver.steps", minimum=100)
    kmax = _integer(opts.get("kmax", 10), "solver.kmax", minimum=1)
    h0, drive, space = _build_system(spec.system)
    if drive is None:
        raise ConfigError("system.drive: required for the floquet solver")
    spectrum, coupling = _build_spectral_noise(spec.noise, space)
    obs = _build_observables(spec, space)
    period = 2.0 * np.pi / drive["frequency"]
    basis = floquet.floquet_modes(_h_of_t(h0, drive), period, steps=steps)
    couplings = floquet.floquet_couplings(basis, coupling, kmax=kmax)
    rho0 = _build_initial_dm(spec, space)
    res = floquet.solve_floquet_markov(basis, couplings, spectrum, rho0,
                                       times, observables=dict(obs))
    names = [n for n, _ in obs]
    cols = [np.asarray(res.expectations[n]).real for n in names]
    diag = dict(res.diagnostics)
    diag["quasienergies"] = list(basis.quasienergies)
    return names, cols, diag, {}


def _parse_kernel_flag(text):
    kind, _, rest = text.partition(":")
    params = {}
    if rest:
        for chunk in rest.split(","):
            key, _, val = chunk.partition("=")
            if not val:
                raise ConfigError(f"--kernel: bad parameter {chunk!r}")
            params[key] = val
    if kind in ("exp", "exponential", "normalized_exponential"):
        if set(params) != {"gamma"}:
            raise ConfigError("--kernel: expected gamma=VALUE")
        try:
            gamma = float(params["gamma"])
        except ValueError:
            raise ConfigError("--kernel: gamma must be a number")
        if kind == "normalized_exponential":
            return {"kind": "normalized_exponential", "gamma": gamma}
        return {"kind": "exponential", "gamma": gamma}
    raise ConfigError(f"--kernel: unknown kind {kind!r}")


def _build_kernel(node, path):
    _ensure_object(node, path)
    kind = _string(node.get("kind", ""), f"{path}.kind",
                   choices=("exponential", "normalized_exponential",
                            "tabulated"))
    if kind == "tabulated":
        _check_keys(node, path, ("kind", "times", "values"))
        times = [_number(v, f"{path}.times[{i}]")
                 for i, v in enumerate(node["times"])]
        values = [_number(v, f"{path}.values[{i}]")
                  for i, v in enumerate(node["values"])]
        return nonmarkov.MemoryKernel.tabulated(times, values)
    _check_keys(node, path, ("kind", "gamma"))
    gamma = _number(node["gamma"], f"{path}.gamma")
    if kind == "exponential":
        return nonmarkov.MemoryKernel.exponential(gamma)
    return nonmarkov.MemoryKernel.normalized_exponential(gamma)


def _run_pmme(spec, times, args):
    opts = _solver_options(spec, ("kernel", "memory_dephasing_rate"), ())
    kernel_node = _parse_kernel_flag(args.kernel) if args.kernel \
        else opts["kernel"]
    kernel = _build_kernel(kernel_node, "solver.kernel")
    gamma_z = _number(opts["memory_dephasing_rate"],
                      "solver.memory_dephasing_rate")
    h0, drive, space = _build_system(spec.system)
    if drive:
        raise ConfigError("system.drive: not supported by the pmme solver")
    channels = _build_channels(spec.noise, space) if spec.noise else []
    obs = _build_observables(spec, space)
    from .core import liouvillian

    l0 = liouvillian(h0, channels)
    l1 = nonmarkov.nonmarkov_dephasing(gamma_z)
    model = nonmarkov.PMMEModel(l0, l1, kernel)
    rho0 = _build_initial_dm(spec, space)
    res = nonmarkov.solve_pmme(model, rho0, times, observables=dict(obs))
    names = [n for n, _ in obs]
    cols = [np.asarray(res.expectations[n]).real for n in names]
    return names, cols, res.diagnostics, {}


def _stochastic_common(spec, args):
    opts = _solver_options(spec, ("k",), ("paths",))
    k = args.k if args.k is not None else _number(opts["k"], "solver.k")
    if k <= 0:
        raise ConfigError("solver.k: must be positive")
    paths = args.paths or _integer(opts.get("paths", 1), "solver.paths",
                                   minimum=1)
    seed = _need_seed(spec, args.seed)
    if spec.observables is not None:
        raise ConfigError("observables: fixed for sse/sme; remove the key")
    return k, paths, seed


def _run_sse(spec, times, args):
    k, paths, seed = _stochastic_common(spec, args)
    h0, drive, space = _build_system(spec.system)
    if drive:
        raise ConfigError("system.drive: not supported by the sse solver")
    if space.total != 2:
        raise ConfigError("system: the measurement unraveling is two-level")
    psi0 = _build_initial_ket(spec, space)
    if paths == 1:
        traj, record = stochastic.solve_sse_z(
            k, psi0, times, rng=stochastic._path_rng(seed, 0))
        sz = np.sum(np.array([-1.0, 1.0]) * np.abs(traj.kets) ** 2, axis=1)
        diag = {"max_norm_defect": float(traj.norm_defects.max())}
        rec_rows = list(zip(record.times, record.values))
        return ["sigma_z"], [sz], diag, {"record": rec_rows}
    res = stochastic.sse_z_ensemble(k, psi0, times, paths, seed)
    names = ["mean_sigma_z", "se_sigma_z"]
    cols = [res.mean_sz, res.se_sz]
    frac = float(np.mean(res.final_sz > 0.99))
    return names, cols, {"n_paths": paths, "fraction_up": frac}, {}


def _run_sme(spec, times, args):
    k, paths, seed = _stochastic_common(spec, args)
    h0, drive, space = _build_system(spec.system)
    if drive:
        raise ConfigError("system.drive: not supported by the sme solver")
    if space.total != 2:
        raise ConfigError("system: the measurement unraveling is two-level")
    rho0 = _build_initial_dm(spec, space)
    if paths == 1:
        states, record = stochastic.solve_sme_z(
            k, rho0, times, rng=stochastic._path_rng(seed, 0))
        sz = np.array([s.matrix[1, 1].real - s.matrix[0, 0].real
                       for s in states])
        coh = np.array([abs(s.matrix[0, 1]) for s in states])
        rec_rows = list(zip(record.times, record.values))
        return (["sigma_z", "abs_coherence"], [sz, coh], {},
                {"record": rec_rows})
    res = stochastic.sme_z_ensemble(k, rho0, times, paths, seed)
    names = ["mean_sigma_z", "se_sigma_z", "mean_abs_coherence",
             "se_abs_coherence"]
    cols = [res.mean_sz, res.se_sz, res.mean_abs_coherence,
            res.se_abs_coherence]
    return names, cols, {"n_paths": paths}, {}


_RUNNERS = {
    "lindblad": _run_lindblad,
    "redfield": _run_redfield,
    "mcwf": _run_mcwf,
    "floquet": _run_floquet,
    "pmme": _run_pmme,
    "sse": _run_sse,
    "sme": _run_sme,
}


# -- output writing ----------------------------------------------------


def _fmt(x) -> str:
    return format(float(x), ".16e")


def _write_csv(path, header, times, columns):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(["t"] + list(header)) + "\n")
        for i in range(len(times)):
            row = [times[i]] + [col[i] for col in columns]
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_rows_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(
                str(v) if isinstance(v, (int, np.integer)) else _fmt(v)
                for v in row) + "\n")


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def _write_summary(path, payload):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _attach_fits(names, cols, times):
    fits = {}
    if "p_excited" in names:
        col = cols[names.index("p_excited")]
        try:
            fit = analysis.fit_T1(times, np.clip(col, 0.0, 1.0))
            fits["t1"] = {
                "rate": fit.rate, "time_constant": fit.time_constant,
                "amplitude": fit.amplitude, "offset": fit.offset,
                "rms_residual": fit.rms_residual,
            }
        except (FitError, ConfigError) as exc:
            fits["t1"] = {"error": str(exc)}
    for key in ("sigma_x", "mean_sigma_x"):
        if key in names:
            col = cols[names.index(key)]
            try:
                fit = analysis.fit_T2_ramsey(times, np.asarray(col))
                fits["t2_ramsey"] = {
                    "rate": fit.rate, "time_constant": fit.time_constant,
                    "frequency": fit.frequency, "amplitude": fit.amplitude,
                    "offset": fit.offset, "rms_residual": fit.rms_residual,
                }
            except (FitError, ConfigError) as exc:
                fits["t2_ramsey"] = {"error": str(exc)}
            break
    return fits


# -- subcommands -------------------------------------------------------


def _cmd_simulate(args) -> int:
    spec = parse_config(args.config)
    started = time.perf_counter()
    times = _build_grid(spec)
    runner = _RUNNERS[spec.solver_name]
    names, cols, diagnostics, extras = runner(spec, times, args)

    csv_path = args.out or spec.output.get("csv")
    if not csv_path:
        raise ConfigError("no output path: set output.csv or pass --out")
    _write_csv(csv_path, names, times, cols)
    outputs = {"csv": csv_path}

    if "record" in extras:
        rec_path = spec.output.get("record", csv_path + ".record.csv")
        _write_rows_csv(rec_path, ["t", "v_tilde"], extras["record"])
        outputs["record"] = rec_path
    if "jumps" in extras:
        jump_path = spec.output.get("jumps", csv_path + ".jumps.csv")
        _write_rows_csv(jump_path, ["trajectory_id", "jump_time", "channel"],
                        extras["jumps"])
        outputs["jumps"] = jump_path

    fits = _attach_fits(names, cols, times)
    seed = args.seed if args.seed is not None else spec.seed
    summary = {
        "toolkit_version": __version__,
        "spec_sha256": spec.sha256(),
        "solver": spec.solver_name,
        "seed": seed,
        "wall_time_s": time.perf_counter() - started,
        "diagnostics": diagnostics,
        "fits": fits,
        "outputs": outputs,
    }
    summary_path = spec.output.get("summary", csv_path + ".summary.json")
    _write_summary(summary_path, summary)
    print(f"wrote {csv_path} and {summary_path}")
    return 0


def _build_circuit_params(node, path):
    fields = {}
    for key in ("e_j", "e_c", "e_l", "n_ext", "phi_ext"):
        if key in node:
            fields[key] = _number(node[key], f"{path}.{key}")
    return circuits.CircuitParams(**fields)


def _circuit_spectrum(sys_node):
    kind = _string(sys_node.get("type", ""), "system.type",
                   choices=("transmon", "cpb", "fluxonium"))
    if kind in ("transmon", "cpb"):
        _check_keys(sys_node, "system", ("type", "e_j", "e_c", "ncut"),
                    ("n_ext", "nlevels"))
        params = _build_circuit_params(sys_node, "system")
        ncut = _integer(sys_node["ncut"], "system.ncut", minimum=1)
        nlevels = _integer(sys_node.get("nlevels", 3), "system.nlevels",
                           minimum=2)
        spectrum = circuits.cpb_spectrum(params, ncut, nlevels=nlevels)
        builder = lambda p: circuits.cpb_hamiltonian(p, ncut)
    else:
        _check_keys(sys_node, "system",
                    ("type", "e_j", "e_c", "e_l"),
                    ("phi_ext", "phi_max", "points", "nlevels"))
        params = _build_circuit_params(sys_node, "system")
        phi_max = _number(sys_node.get("phi_max", 6.0 * np.pi),
                          "system.phi_max")
        points = _integer(sys_node.get("points", 1201), "system.points",
                          minimum=3)
        nlevels = _integer(sys_node.get("nlevels", 3), "system.nlevels",
                           minimum=2)
        spectrum = circuits.fluxonium_spectrum(
            params, -phi_max, phi_max, points, nlevels=nlevels)
        builder = lambda p: circuits.fluxonium_hamiltonian(
            p, -phi_max, phi_max, points)
    return spectrum, params, builder


def _cmd_circuit(args) -> int:
    raw = parse_config_raw(args.config)
    _check_keys(raw, "", ("schema", "system"), ("dispersive", "output"))
    if _integer(raw["schema"], "schema") != SCHEMA_VERSION:
        raise ConfigError("schema: unsupported version")
    spectrum, params, _ = _circuit_spectrum(
        _ensure_object(raw["system"], "system"))
    qubit = circuits.qubit_parameters(spectrum)

    out = raw.get("output", {})
    _check_keys(out, "output", (), ("csv", "summary"))
    csv_path = args.out or out.get("csv")
    if not csv_path:
        raise ConfigError("no output path: set output.csv or pass --out")
    rows = list(enumerate(spectrum.energies - spectrum.energies[0]))
    _write_rows_csv(csv_path, ["level", "energy"], rows)

    summary = {
        "toolkit_version": __version__,
        "omega_q": qubit.omega_q,
        "anharmonicity": qubit.anharmonicity,
    }
    if "dispersive" in raw:
        node = _ensure_object(raw["dispersive"], "dispersive")
        _check_keys(node, "dispersive", ("omega_r", "g"), ("nlevels",))
        omega_r = _number(node["omega_r"], "dispersive.omega_r")
        g = _number(node["g"], "dispersive.g")
        nlev = min(
            _integer(node.get("nlevels", len(spectrum.energies)),
                     "dispersive.nlevels", minimum=2),
            len(spectrum.energies))
        levels = spectrum.energies[:nlev] - spectrum.energies[0]
        gmat = np.zeros((nlev, nlev), dtype=complex)
        for j in range(nlev - 1):
            gmat[j, j + 1] = g * np.sqrt(j + 1)  # ladder convention
        disp = circuits.schrieffer_wolff(levels, gmat, omega_r)
        summary["dispersive"] = {
            "chi": disp.chi,
            "omega_r_dressed": disp.omega_r_dressed,
            "omega_q_dressed": disp.omega_q_dressed,
            "lamb_shifts": list(disp.lamb_shifts),
        }
    summary_path = out.get("summary", csv_path + ".summary.json")
    _write_summary(summary_path, summary)
    print(f"wrote {csv_path} and {summary_path}")
    return 0


def parse_config_raw(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno} "
                          f"column {exc.colno}: {exc.msg}")
    return _ensure_object(raw, "")


def _cmd_rates(args) -> int:
    raw = parse_config_raw(args.config)
    _check_keys(raw, "", ("schema", "system", "noise"), ("output",))
    if _integer(raw["schema"], "schema") != SCHEMA_VERSION:
        raise ConfigError("schema: unsupported version")
    spectrum_result, params, builder = _circuit_spectrum(
        _ensure_object(raw["system"], "system"))
    node = _ensure_object(raw["noise"], "noise")
    _check_keys(node, "noise", ("parameter", "delta", "spectrum"))
    lam = _string(node["parameter"], "noise.parameter")
    delta = _number(node["delta"], "noise.delta")
    spectrum = _build_spectrum(node["spectrum"], "noise.spectrum")

    coeffs = noise.circuit_sensitivity(params, lam, delta, builder)
    rates = noise.golden_rule_rates(coeffs, spectrum)
    summary = {
        "toolkit_version": __version__,
        "parameter": lam,
        "omega_q": coeffs.omega_q,
        "sensitivity": {
            "d_z": coeffs.d_z,
            "d2_omega": coeffs.d2_omega,
            "d2_z": coeffs.d2_z,
            "d_perp": coeffs.d_perp,
        },
        "rates": {
            "gamma1": rates.gamma1, "gamma_phi": rates.gamma_phi,
            "gamma2": rates.gamma2, "t1": rates.t1, "t2": rates.t2,
        },
    }
    out = raw.get("output", {})
    _check_keys(out, "output", (), ("summary",))
    summary_path = args.out or out.get("summary")
    if not summary_path:
        raise ConfigError("no output path: set output.summary or pass --out")
    _write_summary(summary_path, summary)
    print(f"wrote {summary_path}")
    return 0


def _cmd_floquet(args) -> int:
    raw = parse_config_raw(args.config)
    _check_keys(raw, "", ("schema", "system"), ("solver", "noise", "output"))
    if _integer(raw["schema"], "schema") != SCHEMA_VERSION:
        raise ConfigError("schema: unsupported version")
    h0, drive, space = _build_system(_ensure_object(raw["system"], "system"))
    if drive is None:
        raise ConfigError("system.drive: required for the floquet command")
    solver_node = raw.get("solver", {})
    _check_keys(solver_node, "solver", (), ("steps", "kmax"))
    steps = _integer(solver_node.get("steps", 256), "solver.steps",
                     minimum=100)
    kmax = _integer(solver_node.get("kmax", 10), "solver.kmax", minimum=1)
    period = 2.0 * np.pi / drive["frequency"]
    basis = floquet.floquet_modes(_h_of_t(h0, drive), period, steps=steps)

    out = raw.get("output", {})
    _check_keys(out, "output", (), ("csv", "summary"))
    csv_path = args.out or out.get("csv")
    if not csv_path:
        raise ConfigError("no output path: set output.csv or pass --out")
    _write_rows_csv(csv_path, ["index", "quasienergy"],
                    list(enumerate(basis.quasienergies)))
    summary = {
        "toolkit_version": __version__,
        "period": basis.period,
        "omega_drive": basis.omega,
        "quasienergies": list(basis.quasienergies),
    }
    if raw.get("noise") is not None:
        spectrum, coupling = _build_spectral_noise(raw["noise"], space)
        couplings = floquet.floquet_couplings(basis, coupling, kmax=kmax)
        rates = floquet.floquet_rates(couplings, spectrum)
        summary["rates"] = {
            "gamma_plus": rates.gamma_plus,
            "gamma_minus": rates.gamma_minus,
            "gamma_phi": rates.gamma_phi,
        }
        summary["parseval_deficit"] = couplings.parseval_deficit
    summary_path = out.get("summary", csv_path + ".summary.json")
    _write_summary(summary_path, summary)
    print(f"wrote {csv_path} and {summary_path}")
    return 0


def _parse_sweep(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError("--sweep: expected START:STOP:POINTS")
    try:
        start, stop = float(parts[0]), float(parts[1])
        points = int(parts[2])
    except ValueError:
        raise ConfigError("--sweep: expected START:STOP:POINTS")
    if points < 2:
        raise ConfigError("--sweep: need at least two points")
    if stop <= start:
        raise ConfigError("--sweep: STOP must exceed START")
    return np.linspace(start, stop, points)


def _cmd_readout(args) -> int:
    if args.kappa <= 0:
        raise ConfigError("--kappa: must be positive")
    port = inout.CavityPort(omega_r=args.omega_r, kappa=args.kappa)
    sweep = _parse_sweep(args.sweep)
    curves = inout.dispersive_readout_curve(port, args.chi, sweep)
    rows = [
        (w, rp.real, rp.imag, rm.real, rm.imag, sep)
        for w, rp, rm, sep in zip(curves.omega_d, curves.r_plus,
                                  curves.r_minus, curves.phase_separation)
    ]
    _write_rows_csv(args.out, ["omega_d", "re_r_plus", "im_r_plus",
                               "re_r_minus", "im_r_minus", "phase_sep"], rows)
    print(f"wrote {args.out}; max separation "
          f"{curves.max_separation:.6g} rad at omega_d = "
          f"{curves.best_omega_d:.6g}")
    return 0


# -- entry point -------------------------------------------------------


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="sqsim",
        description="Open-system dynamics toolkit for superconducting qubits")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a time-evolution solver")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", help="CSV output path (overrides output.csv)")
    sim.add_argument("--seed", type=int, help="override the spec seed")
    sim.add_argument("--threads", type=int, default=1,
                     help="worker threads for ensemble solvers")
    sim.add_argument("--trajectories", type=int,
                     help="override solver.trajectories (mcwf)")
    sim.add_argument("--paths", type=int, help="override solver.paths (sse/sme)")
    sim.add_argument("--k", type=float, help="override solver.k (sse/sme)")
    sim.add_argument("--kernel",
                     help="override solver.kernel (pmme), e.g. exp:gamma=50")
    sim.set_defaults(func=_cmd_simulate)

    circ = sub.add_parser("circuit", help="circuit spectra and parameters")
    circ.add_argument("--config", required=True)
    circ.add_argument("--out", help="CSV output path")
    circ.set_defaults(func=_cmd_circuit)

    rates = sub.add_parser("rates", help="sensitivity and golden-rule rates")
    rates.add_argument("--config", required=True)
    rates.add_argument("--out", help="summary JSON path")
    rates.set_defaults(func=_cmd_rates)

    flq = sub.add_parser("floquet", help="quasienergies of a driven system")
    flq.add_argument("--config", required=True)
    flq.add_argument("--out", help="CSV output path")
    flq.set_defaults(func=_cmd_floquet)

    rd = sub.add_parser("readout", help="dispersive reflection curves")
    rd.add_argument("--chi", type=float, required=True)
    rd.add_argument("--kappa", type=float, required=True)
    rd.add_argument("--omega-r", type=float, default=0.0, dest="omega_r")
    rd.add_argument("--sweep", required=True, help="START:STOP:POINTS")
    rd.add_argument("--out", required=True)
    rd.set_defaults(func=_cmd_readout)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, FitError, ConvergenceError,
            SingularSpectrumError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
