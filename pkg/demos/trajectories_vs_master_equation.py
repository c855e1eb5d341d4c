"""Quantum jumps: single trajectories against the ensemble average.

Individual Monte Carlo wave-function records show the qubit staying
excited for a random waiting time and then dropping in one jump.  The
average over many records reproduces the smooth master-equation decay,
with the residual shrinking like 1/sqrt(N).
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from sqsim.core import Operator, basis_ket, qubit_space, sigma_minus
from sqsim.lindblad import LindbladModel, solve_lindblad
from sqsim.mcwf import JumpModel, ensemble_average, evolve_trajectory

GAMMA = 0.5
N_TRAJ = 400

space = qubit_space()
h = Operator(np.zeros((2, 2)), space)
collapse = Operator(np.sqrt(GAMMA) * sigma_minus().matrix, space)
model = JumpModel(h, (collapse,))
psi0 = basis_ket(space, 1)
t = np.linspace(0.0, 10.0, 201)

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.5, 3.6))

for seed in range(5):
    traj = evolve_trajectory(model, psi0, t, np.random.default_rng(seed))
    pe = np.abs(traj.kets[:, 1]) ** 2
    ax1.plot(t, pe, lw=0.8, alpha=0.8)
    for jump_time, _ in traj.jumps:
        ax1.axvline(jump_time, color="0.8", lw=0.5, zorder=0)
ax1.set_xlabel("time")
ax1.set_ylabel("excited population")
ax1.set_title("five single records")

p_excited = Operator(np.diag([0.0, 1.0]).astype(complex), space)
ens = ensemble_average(model, psi0, t, n_traj=N_TRAJ, master_seed=99,
                       observables={"p_e": p_excited}, threads=4)
ref = solve_lindblad(LindbladModel(h, ((sigma_minus(), GAMMA),)),
                     psi0.dm(), t, observables={"p_e": p_excited},
                     store_states=False)
mean_pe = np.asarray(ens.expectations["p_e"]).real
exact = np.asarray(ref.expectations["p_e"]).real

ax2.plot(t, mean_pe, "C0", label=f"mean of {N_TRAJ} records")
ax2.plot(t, exact, "k--", lw=1, label="master equation")
ax2.fill_between(t, mean_pe - ens.std_errors["p_e"],
                 mean_pe + ens.std_errors["p_e"], alpha=0.3)
ax2.set_xlabel("time")
ax2.legend(frameon=False)
ax2.set_title("ensemble average")

resid = np.abs(mean_pe - exact).max()
n_jumps = sum(len(j) for j in ens.jump_times)
print(f"max |ensemble - exact| = {resid:.4f} (band ~ {1/np.sqrt(N_TRAJ):.4f})")
print(f"{n_jumps} jumps over {N_TRAJ} trajectories")

fig.tight_layout()
fig.savefig("trajectories_vs_master_equation.png", dpi=150)
print("wrote trajectories_vs_master_equation.png")
