"""Continuous z-measurement: diffusion, collapse, and the ensemble.

Monitoring sigma_z weakly drives each pure state along a random walk that
ends pinned at one of the two poles, with Born-rule branching ratios.
Averaging the records washes the conditioning out again: the mean
coherence decays at the measurement-induced dephasing rate 2k.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from sqsim.core import Ket, qubit_space
from sqsim.stochastic import solve_sse_z, sse_z_ensemble, sme_z_ensemble

K = 1.0

space = qubit_space()
plus = Ket(np.array([1.0, 1.0]) / np.sqrt(2.0), space)
t = np.linspace(0.0, 6.0, 1201)

fig, (ax1, ax2, ax3) = plt.subplots(1, 3, figsize=(12.5, 3.6))

for seed in range(8):
    traj, record = solve_sse_z(K, plus, t, rng=np.random.default_rng(seed))
    sz = np.sum(np.array([-1.0, 1.0]) * np.abs(traj.kets) ** 2, axis=1)
    ax1.plot(t, sz, lw=0.7)
ax1.set_xlabel("time")
ax1.set_ylabel(r"$\langle\sigma_z\rangle$")
ax1.set_title("eight monitored runs")

ens = sse_z_ensemble(K, plus, t, n_paths=2000, master_seed=17)
frac_up = float(np.mean(ens.final_sz > 0.99))
ax2.hist(ens.final_sz, bins=41, range=(-1.05, 1.05), color="C0")
ax2.set_xlabel(r"final $\langle\sigma_z\rangle$")
ax2.set_ylabel("paths")
ax2.set_title(f"collapse statistics: {frac_up:.1%} up")

rho_ens = sme_z_ensemble(K, plus.dm(), t, n_paths=2000, master_seed=18)
ax3.plot(t, rho_ens.mean_abs_coherence, "C0",
         label=r"mean $|\rho_{01}|$ over paths")
ax3.plot(t, 0.5 * np.exp(-2.0 * K * t), "k--", lw=1,
         label=r"$\frac{1}{2}e^{-2kt}$")
ax3.set_xlabel("time")
ax3.legend(frameon=False)
ax3.set_title("unconditioned dephasing")

print(f"fraction collapsed up: {frac_up:.4f} (Born rule: 0.5)")
print(f"mean sigma_z at end: {ens.mean_sz[-1]:+.4f} "
      f"(martingale: {0.0:+.1f})")

fig.tight_layout()
fig.savefig("continuous_measurement.png", dpi=150)
print("wrote continuous_measurement.png")
