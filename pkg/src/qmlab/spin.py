"""Single-spin operators in the Dicke basis |S,S>, |S,S-1>, ..., |S,-S>."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from . import constants
from .linalg import as_sparse


@dataclass(frozen=True)
class SpinSpec:
    two_s: int

    def __post_init__(self):
        if self.two_s < 0:
            raise ValueError(f"2S must be nonnegative, got {self.two_s}")

    @property
    def s(self):
        return self.two_s / 2

    @property
    def dim(self):
        return self.two_s + 1

    @classmethod
    def of(cls, s):
        """Build from S given as int, float or SpinSpec."""
        if isinstance(s, SpinSpec):
            return s
        two_s = round(2 * s)
        if abs(two_s - 2 * s) > 1e-12:
            raise ValueError(f"S must be a multiple of 1/2, got {s}")
        return cls(int(two_s))


def m_values(s):
    """Projections M in basis order (decreasing)."""
    spec = SpinSpec.of(s)
    return spec.s - np.arange(spec.dim)


@lru_cache(maxsize=64)
def _splus(two_s):
    s = two_s / 2
    m = s - np.arange(1, two_s + 1)  # M = S-1 ... -S
    entries = np.sqrt(s * (s + 1) - m * (m + 1))
    return as_sparse(sp.diags(entries, 1, shape=(two_s + 1, two_s + 1)))


def splus(s):
    return _splus(SpinSpec.of(s).two_s).copy()


def sminus(s):
    return as_sparse(splus(s).conj().T)


def sx(s):
    return as_sparse((splus(s) + sminus(s)) / 2)


def sy(s):
    return as_sparse((splus(s) - sminus(s)) / 2j)


def sz(s):
    return as_sparse(sp.diags(m_values(s).astype(complex)))


def sid(s):
    return as_sparse(sp.identity(SpinSpec.of(s).dim))


def rotation(s, axis, alpha):
    """exp(-i alpha n.S) for a unit axis n."""
    n = np.asarray(axis, dtype=float)
    if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise ValueError(f"axis must be a unit 3-vector, got {axis}")
    gen = n[0] * sx(s) + n[1] * sy(s) + n[2] * sz(s)
    return sla.expm(-1j * alpha * gen.toarray())


def unit_prefactor(b0_gauss=1.0, e0_mhz=1.0):
    """k = muB * B0 / E0 with B0 in gauss and E0 in h*MHz."""
    return constants.MU_B * b0_gauss / e0_mhz


def zeeman_hamiltonian(field, k=None, ge=constants.G_E):
    """Electron spin-1/2 in a dc field: k * (-ge) * (Sx Bx + Sy By + Sz Bz)."""
    if k is None:
        k = unit_prefactor()
    bx, by, bz = field
    h = sx(0.5) * bx + sy(0.5) * by + sz(0.5) * bz
    return as_sparse(k * (-ge) * h)
