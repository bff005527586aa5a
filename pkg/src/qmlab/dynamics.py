"""Split-step propagation in real and imaginary time, 1D and 3D.

States are arrays of finite-resolution position coefficients: shape (n,) in
1D and (n, n, n) in 3D. Energies are in units of E1 of the box, so the kinetic
operator is diagonal with entries n^2 (or nx^2 + ny^2 + nz^2) in the momentum
basis, and the non-linear term is g (n_max+1)^d |v_j|^2.
"""

from dataclasses import dataclass, field

import numpy as np

from . import constants
from .grid1d import dstn
from .linalg import ConvergenceError


@dataclass(frozen=True)
class SplitStepPlan:
    n_max: int
    ndim: int
    wval: np.ndarray  # potential on the grid, shape (n_max,)*ndim
    g: float = 0.0
    ksq: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.ndim not in (1, 3):
            raise ValueError("split-step plans are 1D or 3D")
        shape = (self.n_max,) * self.ndim
        w = np.asarray(self.wval, dtype=float)
        if w.shape != shape:
            raise ValueError(f"potential shape {w.shape} does not match grid {shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("potential has non-finite values")
        object.__setattr__(self, "wval", w)
        n2 = np.arange(1, self.n_max + 1, dtype=float) ** 2
        if self.ndim == 1:
            ksq = n2
        else:
            ksq = n2[:, None, None] + n2[None, :, None] + n2[None, None, :]
        object.__setattr__(self, "ksq", ksq)

    @property
    def shape(self):
        return (self.n_max,) * self.ndim

    @property
    def density_factor(self):
        # |psi(x_j)|^2 = (n_max+1)^d |v_j|^2
        return float((self.n_max + 1) ** self.ndim)


def plan_1d(grid, w=None, g=0.0):
    """Plan on a :class:`Grid1D` with potential callable ``w`` (default 0)."""
    wval = np.zeros(grid.n_max) if w is None else np.array([w(x) for x in grid.x], dtype=float)
    return SplitStepPlan(grid.n_max, 1, wval, float(g))


def _check_state(plan, psi):
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != plan.shape:
        raise ValueError(f"state shape {psi.shape} does not match plan {plan.shape}")
    return psi


def _pot_exponent(plan, p):
    return plan.wval + plan.g * plan.density_factor * np.abs(p) ** 2


def propagate_real(plan, psi0, dt, steps, trajectory=False):
    """exp(-i dt H) psi0 by symmetric split-step with ``steps`` kinetic steps.

    With ``trajectory`` the states at t = k dt/steps, k = 0..steps, are
    returned stacked along the first axis.
    """
    if steps < 2:
        raise ValueError("split-step needs at least 2 steps")
    psi = _check_state(plan, psi0)
    tau = dt / steps
    ke = np.exp(-1j * tau * plan.ksq)

    def kin(p):
        return dstn(ke * dstn(p))

    def pot(h, p):
        return np.exp(-1j * h * _pot_exponent(plan, p)) * p

    p = kin(pot(tau / 2, psi))
    if trajectory:
        out = np.empty((steps + 1,) + plan.shape, dtype=complex)
        out[0] = psi
        out[1] = pot(tau / 2, p)
    for k in range(2, steps + 1):
        p = kin(pot(tau, p))
        if trajectory:
            out[k] = pot(tau / 2, p)
    return out if trajectory else pot(tau / 2, p)


def random_state(shape, rng):
    """Normalized complex entries uniform in the square [-1-i, 1+i]."""
    v = rng.uniform(-1, 1, shape) + 1j * rng.uniform(-1, 1, shape)
    return v / np.linalg.norm(v)


def gaussian_state(plan, width=0.1):
    """Deterministic normalized Gaussian centred in the box."""
    x = np.arange(1, plan.n_max + 1) / (plan.n_max + 1) - 0.5
    g = np.exp(-(x**2) / (4 * width**2))
    v = g
    for _ in range(plan.ndim - 1):
        v = np.multiply.outer(v, g)
    v = v.astype(complex)
    return v / np.linalg.norm(v)


def chemical_potential(plan, gamma):
    """mu = sum k^2 |u|^2 + sum (W + g (n+1)^d |v|^2) |v|^2 for normalized gamma."""
    u = dstn(gamma)
    d = np.abs(gamma) ** 2
    return float(np.sum(plan.ksq * np.abs(u) ** 2) + np.sum(_pot_exponent(plan, gamma) * d))


@dataclass
class GroundState:
    mu: float
    gamma: np.ndarray
    iterations: int
    mu_history: list = None


def ground_imag(plan, db, tol=None, psi0=None, seed=None, max_iter=10**6, record_mu=False):
    """Imaginary-time relaxation to the (non-linear) ground state.

    Each factor is followed by a renormalization. Iteration stops when two
    successive states differ by less than ``tol`` in Euclidean norm (default
    1e-10 in 1D, 1e-6 in 3D).

    The non-linear factor is explicit, so db times the chemical potential
    should stay below about one; larger steps make the iteration oscillate
    instead of converging.
    """
    if db <= 0:
        raise ValueError("imaginary time step must be positive")
    if tol is None:
        tol = 1e-10 if plan.ndim == 1 else 1e-6
    if psi0 is None:
        psi0 = random_state(plan.shape, np.random.default_rng(seed))
    p = _check_state(plan, psi0)
    ke = np.exp(-db * plan.ksq)

    def nn(v):
        return v / np.linalg.norm(v)

    def kin(v):
        return nn(dstn(ke * dstn(v)))

    def pot(h, v):
        return nn(np.exp(-h * _pot_exponent(plan, v)) * v)

    p = kin(pot(db / 2, nn(p)))
    history = [] if record_mu else None
    for it in range(1, max_iter + 1):
        q = kin(pot(db, p))
        if record_mu:
            history.append(chemical_potential(plan, pot(db / 2, q)))
        if np.linalg.norm(q - p) < tol:
            gamma = pot(db / 2, q)
            return GroundState(chemical_potential(plan, gamma), gamma, it, history)
        p = q
    raise ConvergenceError(f"imaginary-time iteration did not converge in {max_iter} steps", float(np.linalg.norm(q - p)))


@dataclass(frozen=True)
class TrapParams:
    """Atoms in a harmonic trap inside a cubic box of side ``box`` (SI units)."""

    mass_u: float = constants.RB87_MASS_U
    box: float = 10e-6
    freqs_hz: tuple = (115.0, 540.0, 540.0)
    a_s_bohr: float = 100.4
    n_atoms: int = 1000

    @property
    def mass(self):
        return self.mass_u * constants.AMU

    @property
    def omegas(self):
        return tuple(2 * np.pi * f for f in self.freqs_hz)

    @property
    def a_s(self):
        return self.a_s_bohr * constants.BOHR_RADIUS

    @property
    def trap_dimensionless(self):
        """Omega_u = m w_u a^2 / (pi hbar)."""
        return tuple(self.mass * w * self.box**2 / (np.pi * constants.HBAR_SI) for w in self.omegas)

    @property
    def gamma(self):
        """Dimensionless scattering length 8 a_s / (pi a)."""
        return 8 * self.a_s / (np.pi * self.box)


@dataclass(frozen=True)
class Grid3D:
    n_max: int
    omegas: tuple  # dimensionless trap frequencies
    gamma: float
    n_atoms: int

    def __post_init__(self):
        if self.n_max < 2:
            raise ValueError("n_max must be >= 2")
        if len(self.omegas) != 3 or any(o < 0 for o in self.omegas):
            raise ValueError(f"need three nonnegative trap frequencies, got {self.omegas}")

    @classmethod
    def from_trap(cls, trap, n_max=41):
        return cls(n_max, trap.trap_dimensionless, trap.gamma, trap.n_atoms)

    @property
    def xval(self):
        """Grid coordinates centred on the box: j/(n+1) - 1/2."""
        return np.arange(1, self.n_max + 1) / (self.n_max + 1) - 0.5

    def potential(self):
        x = self.xval
        ox, oy, oz = self.omegas
        return (ox * x[:, None, None]) ** 2 + (oy * x[None, :, None]) ** 2 + (oz * x[None, None, :]) ** 2

    def plan(self):
        return SplitStepPlan(self.n_max, 3, self.potential(), self.gamma * (self.n_atoms - 1))


def moments_3d(gamma, grid):
    """First and second moments of |gamma|^2 on the centred grid, plus widths."""
    d = np.abs(np.asarray(gamma)) ** 2
    x = grid.xval
    out = {}
    widths = []
    for axis, name in enumerate("xyz"):
        marg = d.sum(axis=tuple(a for a in range(3) if a != axis))
        m1 = float(np.sum(x * marg))
        m2 = float(np.sum(x**2 * marg))
        out[name] = m1
        out[name + name] = m2
        widths.append(float(np.sqrt(max(m2 - m1 * m1, 0.0))))
    out["widths"] = tuple(widths)
    return out


def harmonic_widths(trap):
    """Non-interacting ground-state widths sqrt(hbar/(2 m w)) in units of the box."""
    return tuple(np.sqrt(constants.HBAR_SI / (2 * trap.mass * w)) / trap.box for w in trap.omegas)


def thomas_fermi(trap):
    """Inverted-parabola density parameters (SI units) for a trap."""
    m, hb, a_s = trap.mass, constants.HBAR_SI, trap.a_s
    n1 = trap.n_atoms - 1
    if n1 < 1 or a_s <= 0:
        raise ValueError("Thomas-Fermi limit needs N >= 2 and a positive scattering length")
    wx, wy, wz = trap.omegas
    w2 = (wx * wy * wz) ** 2
    rho0 = (225 * m**6 * w2 / (hb**6 * a_s**3 * n1**3)) ** 0.2 / (8 * np.pi)
    radii = tuple(
        (15 * hb**2 * a_s * n1 * wb * wc / (m**2 * wa**4)) ** 0.2
        for wa, wb, wc in ((wx, wy, wz), (wy, wz, wx), (wz, wx, wy))
    )
    mu = 0.5 * (225 * m * hb**4 * a_s**2 * n1**2 * w2) ** 0.2
    return {
        "rho0": rho0,
        "Rx": radii[0],
        "Ry": radii[1],
        "Rz": radii[2],
        "mu": mu,
        "xx": radii[0] ** 2 / 7,
        "yy": radii[1] ** 2 / 7,
        "zz": radii[2] ** 2 / 7,
    }
