"""Split-step error against the exact exponential; the symmetric splitting is second order."""

import numpy as np

from qmlab import dynamics, grid1d
from qmlab.linalg import expm_action

g = grid1d.Grid1D(64)
w = lambda x: 1e4 * (x - 0.5) ** 2  # noqa: E731
psi = np.exp(-(((g.x - 0.4) / 0.1) ** 2)).astype(complex)
psi /= np.linalg.norm(psi)
dt = 0.01
ref = expm_action(grid1d.kinetic_position(g) + grid1d.potential_position(g, w), -1j * dt, psi)
plan = dynamics.plan_1d(g, w)

ms = 2 ** np.arange(3, 10)
err = [np.linalg.norm(dynamics.propagate_real(plan, psi, dt, m) - ref) for m in ms]
for m, e in zip(ms, err):
    print(f"M = {m:4d}  error = {e:.3e}")
print(f"slope {np.polyfit(np.log(ms), np.log(err), 1)[0]:.3f}")
