"""
Directional amplification in three lines
=========================================

Cavity a1 carries the gain medium, a2 and a3 are passive, and a single
mechanical mode couples to all three. Pick the loop phase and hopping right
and the signal goes a1 -> a2 amplified while a2 -> a1 is blocked.
"""
import numpy as np

import optoamp
from optoamp.scattering import to_db
from optoamp.sysmodel import TWO_PI

# the default preset already has phi = -pi/2, J = sqrt(k2 k3)/2 and the
# matching G3; rates are stored in rad/us, print them back in MHz
p = optoamp.preset("fig3")
for key, value in p.to_megahertz().items():
    print(f"{key:>10s} = {value}")

# one scattering matrix at resonance, 8x8 over every input channel
T = optoamp.transmission_matrix(p, 0.0).matrix
print("\n|T21(0)|^2 =", abs(T[1, 0]) ** 2)
print("|T12(0)|^2 =", abs(T[0, 1]) ** 2, " <- the backward path is gone")
print("|T31(0)|^2 =", abs(T[2, 0]) ** 2, " <- nothing leaks into a3")

s = optoamp.gain(p)
print(f"\ngain {s.gain_db:.2f} dB, half-power width {s.bandwidth_numeric / TWO_PI:.3f} MHz")

# a coarse text spectrum: forward vs backward, in dB
f = np.linspace(-1.5, 1.5, 13)
fwd = to_db(np.abs(optoamp.t21_closed(p, TWO_PI * f)) ** 2)
bwd = to_db(np.abs(optoamp.t12_closed(p, TWO_PI * f)) ** 2 + 1e-30)
print("\n  detuning   T21 [dB]   T12 [dB]")
for row in zip(f, fwd, bwd):
    print("  %7.2f  %9.2f  %9.2f" % row)

# flip the loop phase: the roles of the two ports swap
q = p.replace(phi=np.pi / 2)
print("\nphi = +pi/2:  |T12(0)|^2 =", abs(optoamp.t12_closed(q, 0.0)) ** 2,
      " |T21(0)|^2 =", abs(optoamp.t21_closed(q, 0.0)) ** 2)

# and the gain medium matters: run it as a plain lossy cavity
passive = optoamp.preset("fig5", f_ga=-2.0)
print("passive cavity a1, |T21(0)|^2 =", abs(optoamp.resonant_t21(passive)) ** 2)
