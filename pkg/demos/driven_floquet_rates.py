"""Floquet picture of a strongly driven qubit.

Quasienergies of a driven two-level system fold into the first zone
[-W/2, W/2) and repel as the drive amplitude grows.  The sideband
couplings then turn a noise spectrum into relaxation and dephasing rates
sampled on the comb w = +-e01 + k W, and the filter function shows how a
longer evolution samples those comb teeth ever more sharply.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from sqsim.core import Operator, qubit_space, sigma_x, sigma_z
from sqsim.floquet import filter_function, floquet_couplings, floquet_modes, floquet_rates
from sqsim.noise import NoiseSpectrum

OMEGA0 = 1.0
DRIVE = 5.0
PERIOD = 2.0 * np.pi / DRIVE

space = qubit_space()
sz, sx = sigma_z().matrix, sigma_x().matrix


def h_at(amp):
    def h_t(t):
        return Operator(0.5 * OMEGA0 * sz + amp * np.cos(DRIVE * t) * sx, space)
    return h_t


amps = np.linspace(0.0, 3.0, 31)
quasi = np.array([np.sort(floquet_modes(h_at(a), PERIOD, steps=256).quasienergies)
                  for a in amps])

fig, (ax1, ax2, ax3) = plt.subplots(1, 3, figsize=(12.5, 3.6))
ax1.plot(amps, quasi[:, 0], "C0")
ax1.plot(amps, quasi[:, 1], "C1")
ax1.axhline(DRIVE / 2, color="0.7", lw=0.7)
ax1.axhline(-DRIVE / 2, color="0.7", lw=0.7)
ax1.set_xlabel("drive amplitude")
ax1.set_ylabel("quasienergy")
ax1.set_title("first-zone quasienergies")

# comb rates for a moderate drive and a 1/f-like tabulated spectrum
basis = floquet_modes(h_at(1.0), PERIOD, steps=512)
coup = floquet_couplings(basis, sigma_x(), kmax=10)
spectrum = NoiseSpectrum.flat(0.01)
rates = floquet_rates(coup, spectrum)
print(f"gamma_plus  = {rates.gamma_plus:.5f}")
print(f"gamma_minus = {rates.gamma_minus:.5f}")
print(f"gamma_phi   = {rates.gamma_phi:.5f}")
print("parseval deficit:", {k: f"{v:.2e}"
                            for k, v in coup.parseval_deficit.items()})

omega = np.linspace(-12.0, 12.0, 2001)
for t_probe, color in ((10.0 * PERIOD, "C0"), (40.0 * PERIOD, "C1")):
    f = np.array([filter_function(coup, "minus", w, t_probe) for w in omega])
    ax2.plot(omega, f / t_probe, color, lw=0.8,
             label=f"t = {t_probe / PERIOD:.0f} periods")
ax2.set_xlabel("frequency")
ax2.set_ylabel("filter function / t")
ax2.legend(frameon=False, fontsize=8)
ax2.set_title("comb sampling sharpens with time")

# weight of each downward comb tooth
teeth = np.arange(-10, 11)
eps = np.sort(basis.quasienergies)
e01 = eps[1] - eps[0]
weights = []
for k in teeth:
    w = e01 + k * DRIVE
    weights.append(filter_function(coup, "minus", w, 40.0 * PERIOD))
ax3.stem(teeth, np.asarray(weights) / (40.0 * PERIOD))
ax3.set_xlabel("sideband index k")
ax3.set_ylabel("tooth weight / t")
ax3.set_title("sideband decomposition")

fig.tight_layout()
fig.savefig("driven_floquet_rates.png", dpi=150)
print("wrote driven_floquet_rates.png")
