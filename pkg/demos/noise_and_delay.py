"""
Added noise and slow light
==========================

Two things that come along with gain: how many quanta the amplifier adds
at its input, and how long a pulse is held back on resonance.
"""
import numpy as np

import optoamp
from optoamp.response import default_delay_grid
from optoamp.sysmodel import with_rule_line

# warm mechanics, n_m = 100, and the coupling G1 pushed up along the rule line
base = optoamp.preset("fig6")
print("f_G1   gain [dB]   added quanta   closed form")
for f_G1 in (2.0, 5.0, 10.0):
    p = with_rule_line(base, f_G1)
    print("%4.0f   %8.2f   %11.4f   %11.4f" % (
        f_G1, optoamp.gain(p).gain_db, optoamp.added_noise(p, 0.0),
        optoamp.added_noise_resonant_closed(p)))
# the floor is 1.5: half a quantum of vacuum plus a full quantum from the gain medium

# losing photons to the environment costs noise quickly
for eta in (1.0, 0.75, 0.5):
    p = base.replace(eta1=eta, eta2=eta, eta3=eta)
    print(f"eta = {eta:4.2f}: added quanta {optoamp.added_noise(p, 0.0):.3f}")

# group delay: derivative of the unwrapped phase of T21
grid = default_delay_grid()
active = with_rule_line(optoamp.preset("fig8"), 5.0)
passive = active.replace(g_a=-active.kappa1)
for label, p in (("active", active), ("passive", passive)):
    curve = optoamp.group_delay(p, grid)
    print(f"{label:>8s}: peak delay {curve.delay.max():.3f} us")

# the delay grows with the coupling
for f_G1 in (2.0, 5.0, 10.0):
    d = optoamp.group_delay(with_rule_line(optoamp.preset("fig8"), f_G1), grid).delay
    print(f"f_G1 = {f_G1:4.1f} MHz -> tau(0) = {d[np.argmin(np.abs(grid))]:.3f} us")
