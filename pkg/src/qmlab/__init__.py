"""Numerical quantum-mechanics toolkit: spins, grids, split-step dynamics, PIMC."""

__version__ = "0.1.0"
