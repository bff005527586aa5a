"""Ground state of the square well with a step: analytic solution vs both grid methods."""

import numpy as np

from qmlab import grid1d

OMEGA = 2.0

sol = grid1d.stepwell_analytic(OMEGA)
print(f"k1 = {sol.k1:.8f}  k2 = {sol.k2:.8f}  E = {sol.energy:.10f}")
ns = np.arange(8, 34, 2)
rows = []
for n in ns:
    em, u = grid1d.stepwell_ground_momentum(OMEGA, n)
    ep, v = grid1d.stepwell_ground_position(OMEGA, n)
    rows.append((n, em, grid1d.overlap_deficit(sol, u), ep, grid1d.overlap_deficit(sol, grid1d.to_momentum(v))))
    print("%3d  %.10f  %.3e  %.10f  %.3e" % rows[-1])
r = np.array(rows)
for k, name in ((2, "momentum"), (4, "position")):
    print(f"{name} basis: deficit ~ n_max^{np.polyfit(np.log(r[:, 0]), np.log(r[:, k]), 1)[0]:.2f}")
