"""Rb-87 ground-state levels versus field, plus the magic field of the (2,1)-(1,-1) clock pair."""

import argparse

import numpy as np

from qmlab import hyperfine
from qmlab.io import ResultTable, write_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bmax", type=float, default=3000.0, help="largest field in gauss")
    ap.add_argument("--points", type=int, default=301)
    ap.add_argument("--out", default="hyperfine_diagram.csv")
    args = ap.parse_args()

    model = hyperfine.HyperfineModel()
    bz = np.linspace(0, args.bmax, args.points)
    energies, labels, worst = hyperfine.track_levels(model, bz)
    cols = ["bz"] + [f"E_F{f}_M{m:+d}" for f, m in labels]
    write_table(ResultTable(cols, np.column_stack([bz, energies]).tolist()), args.out)
    print(f"{len(bz)} fields -> {args.out} (worst tracking overlap {worst.min():.4f})")

    b, val = hyperfine.magic_field(model)
    print(f"magic field {b:.6f} G, E(2,1) - E(1,-1) - 2A = {val:.8f} MHz")


if __name__ == "__main__":
    main()
