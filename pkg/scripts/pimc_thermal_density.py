"""Closed-ring path-integral Monte Carlo for the oscillator at three temperatures."""

import argparse

import numpy as np

from qmlab import pimc


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sweeps", type=int, default=10**5)
    ap.add_argument("--seed", type=int, default=pimc.DEFAULT_SEED)
    args = ap.parse_args()

    for zeta in (10.0, 1.0, 0.1):
        m = pimc.default_slices(zeta)
        d1, d2 = pimc.default_steps(zeta, m)
        ens = pimc.sample_closed_paths(0.0, m, zeta, d1, d2, 0.5, args.sweeps, pimc.make_rng(args.seed))
        _, _, edges = pimc.density_from_rings(ens.rings)
        chi = pimc.chi2_rings(ens.rings, edges, pimc.gaussian_bin_probs(edges, pimc.ho_variance(zeta)))
        _, dens_c, edges_c = pimc.density_from_rings(ens.rings, centered=True)
        centres = (edges_c[1:] + edges_c[:-1]) / 2
        loop = np.sum(centres**2 * dens_c * np.diff(edges_c))
        acc = ens.stats.as_dict()
        print(
            f"zeta={zeta:5.1f} M={m:3d}  <x^2>={np.mean(ens.rings**2):.4f} "
            f"(exact {pimc.ho_variance(zeta):.4f}, M-slice {pimc.ring_variance(zeta, m):.4f})  "
            f"chi2 p={chi.p_value:.3f}  loop size {loop:.4f}  "
            f"acc {acc['bead']['ratio']:.2f}/{acc['ring']['ratio']:.2f}"
        )


if __name__ == "__main__":
    main()
