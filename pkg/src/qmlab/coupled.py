"""Composite grid problems: two particles in a box, and a particle with spin.

Two-particle states use |j1> (x) |j2> with j1 slow. The spin-space problem
uses |j> (x) |up/down> with the position index slow and the spin index fast.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .composite import check_density_matrix
from .grid1d import Grid1D, kinetic_position
from .linalg import as_sparse, eigs_smallest, kron
from .spin import sx, sz

KINDS = ("contact", "truncated_coulomb")


def quartic_overlap(n_max):
    """Integral of theta_j^4 for the centre grid function, used for every j."""
    return (2 * (n_max + 1) + 1 / (n_max + 1)) / 3


def contact_interaction(grid):
    """Diagonal delta(x1-x2) matrix; nonzero only on |j, j>."""
    n = grid.n_max
    diag = np.zeros(n * n)
    diag[np.arange(n) * (n + 1)] = quartic_overlap(n)
    return as_sparse(sp.diags(diag))


def truncated_coulomb(strength, delta, x):
    """strength/|x| outside |x| < delta, a smooth parabolic cap inside."""
    if delta <= 0:
        raise ValueError("truncation scale must be positive")
    x = np.abs(np.asarray(x, dtype=float))
    inner = (3 * delta**2 - x**2) / (2 * delta**3)
    with np.errstate(divide="ignore"):
        outer = 1.0 / x
    return strength * np.where(x < delta, inner, outer)


@dataclass(frozen=True)
class TwoBodyModel:
    n_max: int
    Omega: float = 0.0
    g: float = 0.0
    kind: str = "contact"
    delta: float = None  # truncation scale; defaults to one grid spacing
    potential: object = None  # single-particle W(x), scaled by Omega

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown interaction {self.kind!r}; choose from {KINDS}")
        Grid1D(self.n_max)

    @property
    def grid(self):
        return Grid1D(self.n_max)


def two_body_hamiltonian(m):
    g1 = m.grid
    n = m.n_max
    ident = sp.identity(n)
    hk = kinetic_position(g1)
    h = kron([hk, ident]) + kron([ident, hk])
    if m.potential is not None and m.Omega != 0:
        w = sp.diags([m.potential(x) for x in g1.x])
        h = h + m.Omega * (kron([w, ident]) + kron([ident, w]))
    if m.g != 0:
        if m.kind == "contact":
            h = h + m.g * contact_interaction(g1)
        else:
            delta = m.delta if m.delta is not None else 1.0 / (n + 1)
            x = g1.x
            v = truncated_coulomb(m.g, delta, x[:, None] - x[None, :]).ravel()
            h = h + sp.diags(v)
    return as_sparse(h)


def exchange(n):
    """Permutation |j1, j2> -> |j2, j1>."""
    idx = np.arange(n * n).reshape(n, n).T.ravel()
    return as_sparse(sp.csr_matrix((np.ones(n * n), (np.arange(n * n), idx)), shape=(n * n, n * n)))


def pad_density(r):
    """Surround a square density with a frame of zeros (box walls)."""
    out = np.zeros((r.shape[0] + 2, r.shape[1] + 2))
    out[1:-1, 1:-1] = r
    return out


@dataclass
class TwoBodyGround:
    energy: float
    psi: np.ndarray
    density2d: np.ndarray  # (n+2, n+2) with zero frame
    parity: float  # exchange eigenvalue

    @property
    def diagonal_density(self):
        return float(np.trace(self.density2d))


def two_body_ground(m):
    h = two_body_hamiltonian(m)
    res = eigs_smallest(h, 1)
    psi = res.vector(0)
    n = m.n_max
    dens = pad_density((n + 1) * np.abs(psi.reshape(n, n)) ** 2)
    parity = float(np.vdot(psi, exchange(n) @ psi).real)
    return TwoBodyGround(float(res.eigenvalues[0]), psi, dens, parity)


def interparticle_stats(psi, grid):
    """<x1 - x2> and its variance on the composite grid."""
    n = grid.n_max
    p = np.abs(np.asarray(psi).reshape(n, n)) ** 2
    d = grid.x[:, None] - grid.x[None, :]
    mean = float(np.sum(p * d))
    return {"mean": mean, "var": float(np.sum(p * d**2) - mean**2)}


@dataclass(frozen=True)
class SpinSpaceModel:
    """Spin-1/2 particle in a harmonic trap with a spin-dependent force.

    H/E1 = kinetic + Omega^2 x^2 - f x S_z + bx S_x on -1/2 < x < 1/2.
    """

    n_max: int
    Omega: float
    f: float
    bx: float

    @property
    def xval(self):
        return np.arange(1, self.n_max + 1) / (self.n_max + 1) - 0.5


def spinspace_hamiltonian(m):
    g = Grid1D(m.n_max)
    x = sp.diags(m.xval)
    idx = sp.identity(m.n_max)
    ids = sp.identity(2)
    h = (
        kron([kinetic_position(g), ids])
        + m.Omega**2 * kron([x @ x, ids])
        - m.f * kron([x, sz(0.5)])
        + m.bx * kron([idx, sx(0.5)])
    )
    return as_sparse(h)


@dataclass
class SpinSpaceGround:
    energies: np.ndarray
    gamma: np.ndarray
    rho_up: np.ndarray  # (n+1) c[j1, up, j2, up]
    rho_down: np.ndarray
    rho_x: np.ndarray  # spin traced out, same normalization
    rho_s: np.ndarray  # 2x2, position traced out
    spin_profile: np.ndarray  # <S_z> conditioned on detection at x_j

    @property
    def gap(self):
        return float(self.energies[1] - self.energies[0])


def spinspace_ground(m, n_states=2):
    h = spinspace_hamiltonian(m)
    res = eigs_smallest(h, n_states)
    gamma = res.vector(0)
    a = gamma.reshape(m.n_max, 2)
    rho = np.einsum("is,jt->isjt", a, a.conj())
    n1 = m.n_max + 1
    rho_up = n1 * rho[:, 0, :, 0]
    rho_down = n1 * rho[:, 1, :, 1]
    rho_s = np.einsum("jsjt->st", rho)
    check_density_matrix(rho_s)
    check_density_matrix(rho_up / n1 + rho_down / n1)
    pj = np.abs(a) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        profile = 0.5 * (pj[:, 0] - pj[:, 1]) / (pj[:, 0] + pj[:, 1])
    return SpinSpaceGround(res.eigenvalues, gamma, rho_up, rho_down, rho_up + rho_down, rho_s, profile)


def perturbative_exponent(Omega, f):
    """F^2/(4 m hbar w^3) expressed with the dimensionless Omega and f."""
    return np.pi * f**2 / (16 * Omega**3)


def perturbative_gap(Omega, f, bx):
    """Splitting bx exp(-F^2/(4 m hbar w^3)) of the two lowest states, in units of E1."""
    if Omega <= 0:
        raise ValueError("trap frequency must be positive")
    return bx * np.exp(-perturbative_exponent(Omega, f))


def perturbative_gap_si(bx, force, mass, omega, hbar):
    """Same splitting in physical units."""
    if mass <= 0 or omega <= 0 or hbar <= 0:
        raise ValueError("mass, frequency and hbar must be positive")
    return bx * np.exp(-(force**2) / (4 * mass * hbar * omega**3))


def gaussian_doublet(m):
    """The bx = 0 ground states on the grid: up at +mu, down at -mu.

    mu = f/(4 Omega^2) and sigma^2 = 1/(2 pi Omega) in box units.
    """
    mu = m.f / (4 * m.Omega**2)
    sigma = np.sqrt(1 / (2 * np.pi * m.Omega))
    x = m.xval
    up = np.exp(-(((x - mu) / (2 * sigma)) ** 2))
    dn = np.exp(-(((x + mu) / (2 * sigma)) ** 2))
    up /= np.linalg.norm(up)
    dn /= np.linalg.norm(dn)
    return np.kron(up, [1, 0]).astype(complex), np.kron(dn, [0, 1]).astype(complex)
