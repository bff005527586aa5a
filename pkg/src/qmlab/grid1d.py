"""Particle in a box [0, 1]: momentum basis, finite-resolution position basis.

Energies are in units of E1 = pi^2 hbar^2 / (2 m a^2), lengths in units of a.
Momentum functions phi_n(x) = sqrt(2) sin(n pi x); grid points x_j = j/(n+1).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft
import scipy.optimize as opt
import scipy.sparse as sp

from .linalg import as_sparse, eigh_dense

FFT_MIN = 64
STEP_THRESHOLD = 1.66809


@dataclass(frozen=True)
class Grid1D:
    n_max: int

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")

    @property
    def x(self):
        return np.arange(1, self.n_max + 1) / (self.n_max + 1)

    @property
    def n(self):
        return np.arange(1, self.n_max + 1)


@lru_cache(maxsize=32)
def dst_matrix(n):
    """X_{nj} = sqrt(2/(n+1)) sin(pi n j/(n+1)); orthogonal and symmetric."""
    k = np.arange(1, n + 1)
    return np.sqrt(2.0 / (n + 1)) * np.sin(np.pi * np.outer(k, k) / (n + 1))


def dst1(v, axis=-1):
    """Orthonormal type-I discrete sine transform along ``axis`` (self-inverse)."""
    v = np.asarray(v)
    n = v.shape[axis]
    if n < 1:
        raise ValueError("dst1 needs a non-empty axis")
    if n > FFT_MIN:
        if np.iscomplexobj(v):
            return scipy.fft.dst(v.real, type=1, norm="ortho", axis=axis) + 1j * scipy.fft.dst(
                v.imag, type=1, norm="ortho", axis=axis
            )
        return scipy.fft.dst(v, type=1, norm="ortho", axis=axis)
    return np.moveaxis(np.tensordot(dst_matrix(n), np.moveaxis(v, axis, 0), axes=1), 0, axis)


def dstn(v):
    """DST-I along every axis."""
    for ax in range(np.ndim(v)):
        v = dst1(v, axis=ax)
    return v


def to_position(u):
    """Momentum-basis coefficients -> position-basis coefficients."""
    return dst1(u)


def to_momentum(v):
    return dst1(v)


def operator_to_position(op_momentum):
    x = dst_matrix(op_momentum.shape[0])
    a = op_momentum.toarray() if sp.issparse(op_momentum) else np.asarray(op_momentum)
    return x @ a @ x


def kinetic_momentum(g):
    return as_sparse(sp.diags(g.n.astype(float) ** 2))


def kinetic_position(g):
    return as_sparse(operator_to_position(np.diag(g.n.astype(float) ** 2)))


def potential_position(g, w):
    """diag(W(x_j)) for a callable W."""
    vals = np.asarray([w(x) for x in g.x], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("potential is not finite on every grid point")
    return as_sparse(sp.diags(vals))


def step_potential(omega):
    """Omega on the left half, 0 on the right, Omega/2 exactly at x = 1/2."""

    def w(x):
        if x < 0.5:
            return omega
        if x == 0.5:
            return omega / 2
        return 0.0

    return w


def stepwell_momentum_me(omega, n, npr, kinetic=True):
    """<n|H|n'> in units of E1 for the half-box step of height Omega."""
    if n < 1 or npr < 1:
        raise ValueError("momentum quantum numbers start at 1")
    if n == npr:
        return (n * n if kinetic else 0.0) + omega / 2
    if (n + npr) % 2 == 1:
        a = (-1) ** ((n + npr + 1) // 2) / (n + npr)
        b = (-1) ** ((n - npr + 1) // 2) / (n - npr)
        return omega / np.pi * (a - b)
    return 0.0


def stepwell_hamiltonian_momentum(omega, n_max):
    h = np.array([[stepwell_momentum_me(omega, n, m) for m in range(1, n_max + 1)] for n in range(1, n_max + 1)])
    return as_sparse(h)


def stepwell_hamiltonian_position(omega, n_max):
    g = Grid1D(n_max)
    return as_sparse(kinetic_position(g) + potential_position(g, step_potential(omega)))


@dataclass(frozen=True)
class StepWellSolution:
    Omega: float
    k1: float
    k2: float
    A: float
    B: float

    @property
    def energy(self):
        return self.k2**2

    def __call__(self, x):
        """psi0: A sinh(k1 pi x) on [0, 1/2], B sin(k2 pi (1-x)) on (1/2, 1]."""
        x = np.asarray(x, dtype=float)
        return np.where(
            x <= 0.5, self.A * np.sinh(self.k1 * np.pi * x), self.B * np.sin(self.k2 * np.pi * (1 - x))
        )


def _match(omega, k2):
    k1 = np.sqrt(max(omega - k2 * k2, 0.0))
    left = 2 / np.pi if k1 == 0 else k1 / np.tanh(np.pi * k1 / 2)
    return left + k2 / np.tan(np.pi * k2 / 2)


def stepwell_analytic(omega):
    """Ground state below the step (E < W0) by bisection on k2."""
    if omega <= STEP_THRESHOLD:
        raise ValueError(f"no bound state below the step for Omega={omega} (need > {STEP_THRESHOLD})")
    lo = 1.0 + 1e-12
    hi = min(2.0 - 1e-12, np.sqrt(omega))
    if _match(omega, lo) * _match(omega, hi) > 0:
        raise ValueError(f"no sign change for Omega={omega}")
    k2 = opt.bisect(lambda k: _match(omega, k), lo, hi, xtol=1e-13, maxiter=200)
    k1 = np.sqrt(max(omega - k2 * k2, 0.0))
    # B from continuity at 1/2, then fix the overall norm
    ratio = np.sinh(k1 * np.pi / 2) / np.sin(k2 * np.pi / 2)
    left = (np.sinh(np.pi * k1) / (2 * np.pi * k1) - 0.5) / 2
    right = (0.5 - np.sin(np.pi * k2) / (2 * np.pi * k2)) / 2
    a = 1.0 / np.sqrt(left + ratio**2 * right)
    return StepWellSolution(float(omega), float(k1), float(k2), float(a), float(a * ratio))


def interpolate_density(g, v):
    """(x, density) points with the box walls appended; density = (n+1)|v_j|^2."""
    v = np.asarray(v)
    if v.shape != (g.n_max,):
        raise ValueError(f"expected {g.n_max} position coefficients, got {v.shape}")
    x = np.concatenate([[0.0], g.x, [1.0]])
    d = np.concatenate([[0.0], (g.n_max + 1) * np.abs(v) ** 2, [0.0]])
    return np.column_stack([x, d])


def momentum_wavefunction(coeffs, x):
    """sum_n c_n sqrt(2) sin(n pi x)."""
    coeffs = np.asarray(coeffs)
    n = np.arange(1, len(coeffs) + 1)
    return np.sqrt(2) * np.sin(np.pi * np.outer(np.asarray(x, dtype=float), n)) @ coeffs


def _gauss_legendre_halves(n_nodes):
    # two panels so the kink of the step-well state at x = 1/2 sits on a panel edge
    t, w = np.polynomial.legendre.leggauss(n_nodes // 2)
    x = np.concatenate([(t + 1) / 4, (t + 3) / 4])
    return x, np.concatenate([w, w]) / 4


def overlap_deficit(solution, coeffs):
    """1 - <psi0|gamma>^2 for momentum coefficients, 16(n_max+1) quadrature nodes."""
    n_max = len(coeffs)
    x, w = _gauss_legendre_halves(16 * (n_max + 1))
    ov = np.sum(w * solution(x) * momentum_wavefunction(coeffs, x))
    return float(1.0 - abs(ov) ** 2)


def stepwell_ground_momentum(omega, n_max):
    res = eigh_dense(stepwell_hamiltonian_momentum(omega, n_max))
    return float(res.eigenvalues[0]), res.vector(0)


def stepwell_ground_position(omega, n_max):
    """Ground state in the mixed basis: returns (energy, position coefficients)."""
    res = eigh_dense(stepwell_hamiltonian_position(omega, n_max))
    return float(res.eigenvalues[0]), res.vector(0)
