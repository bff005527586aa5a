"""Frozen constants table.

Hyperfine energies are in h*MHz, fields in gauss, times in microseconds,
so that hbar = 1/(2*pi) in these units.
"""

import math

# Rb-87 ground-state hyperfine model
A_HFS = 3417.341305452145  # h*MHz
G_S = -2.0023193043622
G_L = -0.99999369
G_I = 0.0009951414
MU_B = 1.3996255481168427  # MHz/G, Bohr magneton over h
G_E = -2.00231930436

HBAR_MHZ = 1.0 / (2.0 * math.pi)  # hbar in h*MHz*us

# SI values for trap-scale problems
HBAR_SI = 1.054571817e-34
AMU = 1.66053906660e-27
BOHR_RADIUS = 52.9177e-12

RB87_MASS_U = 86.909187


def table():
    """All constants as a plain dict (echoed into output metadata)."""
    return {
        "A_hfs_MHz": A_HFS,
        "gS": G_S,
        "gL": G_L,
        "gI": G_I,
        "muB_MHz_per_G": MU_B,
        "ge": G_E,
        "hbar_SI": HBAR_SI,
        "amu_kg": AMU,
        "bohr_radius_m": BOHR_RADIUS,
        "Rb87_mass_u": RB87_MASS_U,
    }
