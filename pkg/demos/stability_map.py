"""
Where is the amplifier stable?
==============================

Sweep the two optomechanical couplings with the amplification conditions
enforced at every cell, then draw the result as text.
"""
import numpy as np

import optoamp
from optoamp.stability import critical_g1, stability_grid

p = optoamp.preset("fig2")
axis = np.linspace(0, 5, 41)
grid = stability_grid(p, axis, axis)

# rows: G2 from top (5 MHz) to bottom; columns: G1 left to right
print("G2/2pi (MHz)")
for j in range(axis.size - 1, -1, -4):
    line = "".join("#" if grid.verdicts[i, j] else "." for i in range(axis.size))
    print(f"{axis[j]:5.2f} |{line}")
print("       " + "-" * axis.size)
print("       G1/2pi from 0 to 5 MHz, '#' = stable")

# the band hugs the diagonal from below; on the line G2 = G1 - 0.1 sqrt(G1)
# stability starts at a critical G1
print("\ncritical G1/2pi on the rule line: %.4f MHz" % critical_g1(p))

# eigenvalues at the operating point
rep = optoamp.stability_report(p)
print("eigenvalues (rad/us):")
for lam in rep.eigenvalues:
    print("   ", np.round(lam, 4))
