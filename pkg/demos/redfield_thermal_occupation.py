"""Bloch-Redfield relaxation with a frequency-dependent bath.

A dielectric-loss spectrum is asymmetric between emission and absorption,
so the Redfield steady state carries a finite thermal excited-state
population set by detailed balance S(-w)/S(+w).  A flat spectrum, by
contrast, reproduces plain Lindblad decay toward the fully mixed state.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from sqsim.core import Operator, basis_ket, qubit_space, sigma_x, sigma_z
from sqsim.noise import NoiseSpectrum
from sqsim.redfield import CouplingSpec, br_tensor, solve_br

OMEGA0 = 1.0
A_D = 0.4

space = qubit_space()
h = Operator(0.5 * OMEGA0 * sigma_z().matrix, space)
rho0 = basis_ket(space, 1).dm()
t = np.linspace(0.0, 1200.0, 241)

temps = [0.1, 0.25, 0.5, 1.0, 2.0]
fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.5, 3.6))

final = []
for temp in temps:
    spec = NoiseSpectrum.dielectric(A_D, temp)
    tensor = br_tensor(h, CouplingSpec(((sigma_x(), spec),)))
    res = solve_br(tensor, rho0, t, store_states=True)
    pe = np.array([s.matrix[1, 1].real for s in res.states])
    ax1.plot(t, pe, label=f"T = {temp}")
    # detailed balance from the spectrum itself
    up, down = spec(-OMEGA0), spec(OMEGA0)
    final.append((temp, pe[-1], up / (up + down)))

ax1.set_xlabel("time")
ax1.set_ylabel("excited population")
ax1.legend(frameon=False, fontsize=8)
ax1.set_title("relaxation into a thermal state")

temps_arr = np.array([f[0] for f in final])
ax2.plot(temps_arr, [f[1] for f in final], "o", label="Redfield steady state")
ax2.plot(temps_arr, [f[2] for f in final], "k--", lw=1,
         label="S(-w)/(S(-w)+S(+w))")
ax2.set_xlabel("bath temperature")
ax2.set_ylabel("equilibrium excited population")
ax2.legend(frameon=False)

for temp, pe_end, balance in final:
    print(f"T = {temp:4}: P_e(end) = {pe_end:.4f}, detailed balance {balance:.4f}")

fig.tight_layout()
fig.savefig("redfield_thermal_occupation.png", dpi=150)
print("wrote redfield_thermal_occupation.png")
