"""Rb-87 condensate in an elongated trap: imaginary-time ground state and Thomas-Fermi check.

Large atom numbers need a larger box (the cloud outgrows 10 um along x) and a
smaller imaginary time step (db * mu must stay below about one).
"""

import argparse
import time

import numpy as np

from qmlab import dynamics


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--atoms", type=int, default=1000)
    ap.add_argument("--box", type=float, default=10e-6, help="box side in metres")
    ap.add_argument("--n-max", type=int, default=41)
    ap.add_argument("--db", type=float, default=1e-3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    trap = dynamics.TrapParams(box=args.box, n_atoms=args.atoms)
    grid = dynamics.Grid3D.from_trap(trap, args.n_max)
    t0 = time.perf_counter()
    gs = dynamics.ground_imag(grid.plan(), args.db, seed=args.seed)
    mom = dynamics.moments_3d(gs.gamma, grid)
    print(f"mu = {gs.mu:.4f} E1 after {gs.iterations} iterations ({time.perf_counter() - t0:.1f} s)")
    print("widths (box units):", np.round(mom["widths"], 6))
    print("non-interacting widths:", np.round(dynamics.harmonic_widths(trap), 6))
    if args.atoms > 1:
        tf = dynamics.thomas_fermi(trap)
        for u in ("xx", "yy", "zz"):
            ana = tf[u] / trap.box**2
            print(f"<{u[0]}^2>: numeric {mom[u]:.5g}, Thomas-Fermi {ana:.5g} ({mom[u] / ana - 1:+.1%})")


if __name__ == "__main__":
    main()
