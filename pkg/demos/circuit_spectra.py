"""Transmon and fluxonium spectra from the circuit Hamiltonians.

Sweeping E_J/E_C shows the charge qubit turning into a transmon: the
charge dispersion of E01 dies off exponentially while the anharmonicity
settles near -E_C.  The fluxonium panel sweeps external flux through the
half-quantum sweet spot.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from sqsim.circuits import CircuitParams, cpb_spectrum, fluxonium_spectrum, qubit_parameters

NCUT = 40

ratios = np.geomspace(1.0, 100.0, 25)
dispersion, anharm = [], []
for ratio in ratios:
    params = CircuitParams(e_j=ratio, e_c=1.0)
    e01 = []
    for n_ext in (0.0, 0.5):
        p = CircuitParams(e_j=ratio, e_c=1.0, n_ext=n_ext)
        s = cpb_spectrum(p, NCUT)
        e01.append(s.energies[1] - s.energies[0])
    dispersion.append(abs(e01[1] - e01[0]))
    anharm.append(qubit_parameters(cpb_spectrum(params, NCUT)).anharmonicity)

fig, (ax1, ax2, ax3) = plt.subplots(1, 3, figsize=(12.5, 3.6))
ax1.semilogy(ratios, dispersion, "C0o-")
ax1.set_xlabel(r"$E_J/E_C$")
ax1.set_ylabel("charge dispersion of E01")
ax1.set_title("charge noise dies off")

ax2.plot(ratios, anharm, "C1o-")
ax2.axhline(-1.0, color="0.6", lw=0.8, ls="--")
ax2.set_xlabel(r"$E_J/E_C$")
ax2.set_ylabel("anharmonicity / $E_C$")
ax2.set_title(r"settles near $-E_C$")

phis = np.linspace(0.0, 2.0 * np.pi, 61)
levels = []
for phi in phis:
    p = CircuitParams(e_j=8.9, e_c=2.5, e_l=0.5, phi_ext=phi)
    s = fluxonium_spectrum(p, -6.0 * np.pi, 6.0 * np.pi, 1201, nlevels=4)
    levels.append(s.energies - s.energies[0])
levels = np.array(levels)
for k in range(1, 4):
    ax3.plot(phis / (2.0 * np.pi), levels[:, k], label=f"E0{k}")
ax3.axvline(0.5, color="0.6", lw=0.8, ls="--")
ax3.set_xlabel(r"external flux $\varphi_{ext}/2\pi$")
ax3.set_ylabel("transition energy")
ax3.legend(frameon=False, fontsize=8)
ax3.set_title("fluxonium flux sweep")

params = CircuitParams(e_j=50.0, e_c=1.0)
q = qubit_parameters(cpb_spectrum(params, NCUT))
print(f"transmon at E_J/E_C = 50: omega_q = {q.omega_q:.4f}, "
      f"anharmonicity = {q.anharmonicity:.4f}")
imin = int(np.argmin(levels[:, 1]))
print(f"fluxonium minimum E01 = {levels[imin, 1]:.4f} "
      f"at flux {phis[imin] / (2 * np.pi):.2f} flux quanta")

fig.tight_layout()
fig.savefig("circuit_spectra.png", dpi=150)
print("wrote circuit_spectra.png")
