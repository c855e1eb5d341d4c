"""Memory effects in dephasing: from coherence revival to Markov.

The post-Markovian equation routes part of the dissipator through a
memory kernel.  With a slow normalized kernel gamma e^{-gamma t} the
coherence rings (the environment "remembers" and partially rephases the
qubit), while a fast kernel collapses onto the memoryless exponential.
The deviation from the Lindblad curve falls off as 1/gamma.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from sqsim.analysis import trace_distance
from sqsim.core import Ket, Operator, liouvillian, qubit_space, sigma_z
from sqsim.lindblad import LindbladModel, solve_lindblad
from sqsim.nonmarkov import MemoryKernel, PMMEModel, nonmarkov_dephasing, solve_pmme

GAMMA_Z = 1.0

space = qubit_space()
h = Operator(np.zeros((2, 2)), space)
rho0 = Ket(np.array([1.0, 1.0]) / np.sqrt(2.0), space).dm()
t = np.linspace(0.0, 3.0, 1501)

ref = solve_lindblad(LindbladModel(h, ((sigma_z(), GAMMA_Z),)), rho0, t,
                     method="expm")
ref_coh = np.array([2.0 * s.matrix[0, 1].real for s in ref.states])

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.5, 3.6))
ax1.plot(t, ref_coh, "k--", lw=1.2, label="memoryless")

gammas = [2.0, 8.0, 32.0, 128.0]
devs = []
for gamma in gammas:
    model = PMMEModel(l0=liouvillian(h), l1=nonmarkov_dephasing(GAMMA_Z),
                      kernel=MemoryKernel.normalized_exponential(gamma))
    res = solve_pmme(model, rho0, t, store_states=True)
    coh = np.array([2.0 * s.matrix[0, 1].real for s in res.states])
    ax1.plot(t, coh, lw=0.9, label=f"kernel rate {gamma:g}")
    devs.append(max(trace_distance(a, b)
                    for a, b in zip(res.states, ref.states)))

ax1.set_xlabel("time")
ax1.set_ylabel(r"coherence $2\,\mathrm{Re}\,\rho_{01}$")
ax1.legend(frameon=False, fontsize=8)
ax1.set_title("kernel memory vs memoryless dephasing")

ax2.loglog(gammas, devs, "o-")
slope = np.polyfit(np.log(gammas[1:]), np.log(devs[1:]), 1)[0]
ax2.set_xlabel("kernel rate")
ax2.set_ylabel("max trace distance to Lindblad")
ax2.set_title(f"Markovian approach, slope {slope:.2f}")

for gamma, dev in zip(gammas, devs):
    print(f"kernel rate {gamma:6g}: max trace distance {dev:.5f}")
print(f"log-log slope (fast kernels): {slope:.3f}")

fig.tight_layout()
fig.savefig("memory_kernel_crossover.png", dpi=150)
print("wrote memory_kernel_crossover.png")
