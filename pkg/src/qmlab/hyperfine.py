"""Rb-87 ground-state hyperfine structure in a magnetic field.

Energies in h*MHz, fields in gauss, time in microseconds (hbar = 1/2pi).
The space is I (dim 4) x S (dim 2) x L (dim 1); J = S + L and F = I + J.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.optimize as opt
from scipy.optimize import linear_sum_assignment

from . import constants
from .composite import embed
from .linalg import as_sparse, eigh_dense, fix_phases
from .spin import sx, sy, sz

LAYOUT = (4, 2, 1)


@dataclass(frozen=True)
class HyperfineModel:
    A: float = constants.A_HFS
    gS: float = constants.G_S
    gL: float = constants.G_L
    gI: float = constants.G_I
    muB: float = constants.MU_B
    ops: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        spins = {"I": 1.5, "S": 0.5, "L": 0.0}
        ops = {}
        for site, (name, s) in enumerate(spins.items(), start=1):
            for axis, f in zip("xyz", (sx, sy, sz)):
                ops[name + axis] = embed(LAYOUT, site, f(s))
        for axis in "xyz":
            ops["J" + axis] = as_sparse(ops["S" + axis] + ops["L" + axis])
            ops["F" + axis] = as_sparse(ops["I" + axis] + ops["J" + axis])
        ops["F2"] = as_sparse(sum(ops["F" + a] @ ops["F" + a] for a in "xyz"))
        object.__setattr__(self, "ops", ops)

    def magnetic_moment(self, axis):
        """gI*I_u + gS*S_u + gL*L_u."""
        o = self.ops
        return self.gI * o["I" + axis] + self.gS * o["S" + axis] + self.gL * o["L" + axis]


def h0(model, bz):
    o = model.ops
    hf = o["Ix"] @ o["Jx"] + o["Iy"] @ o["Jy"] + o["Iz"] @ o["Jz"]
    return as_sparse(model.A * hf - model.muB * bz * model.magnetic_moment("z"))


def h1(model, bac):
    """Coupling to an ac field with amplitude vector ``bac``."""
    bac = np.asarray(bac, dtype=complex)
    return as_sparse(-model.muB * sum(b * model.magnetic_moment(a) for b, a in zip(bac, "xyz")))


@dataclass(frozen=True)
class Levels:
    bz: float
    energies: np.ndarray
    vectors: np.ndarray  # columns, ascending energy
    labels: tuple  # (F, M_F) per column

    def index(self, label):
        return self.labels.index(tuple(label))

    def energy(self, label):
        return float(self.energies[self.index(label)])


def _diagonalize_fz_in_clusters(model, w, v, tol):
    fz = model.ops["Fz"].toarray()
    v = v.copy()
    start = 0
    while start < len(w):
        stop = start + 1
        while stop < len(w) and w[stop] - w[stop - 1] < tol:
            stop += 1
        if stop - start > 1:
            block = v[:, start:stop]
            _, u = np.linalg.eigh(block.conj().T @ fz @ block)
            v[:, start:stop] = block @ u[:, ::-1]
        start = stop
    return fix_phases(v)


def levels(model, bz):
    """Eigenpairs of h0 with (F, M_F) labels.

    M_F is exact because h0 commutes with F_z. Inside each M_F sector the
    F=2 state is the upper one at every field (the sector has no crossings).
    Exactly degenerate multiplets are rotated onto F_z eigenstates first.
    """
    res = eigh_dense(h0(model, bz))
    w = res.eigenvalues
    v = _diagonalize_fz_in_clusters(model, w, res.eigenvectors, 1e-9 * model.A)
    fz = model.ops["Fz"]
    mf = [int(round(np.vdot(v[:, k], fz @ v[:, k]).real)) for k in range(len(w))]
    labels = []
    for k, m in enumerate(mf):
        sector = [j for j in range(len(w)) if mf[j] == m]
        if len(sector) == 1 or k == max(sector, key=lambda j: w[j]):
            labels.append((2, m))
        else:
            labels.append((1, m))
    return Levels(float(bz), w, v, tuple(labels))


def f_quantum_numbers(model, vectors):
    """<F^2> and <F_z> for each column."""
    f2 = model.ops["F2"]
    fz = model.ops["Fz"]
    a = np.array([np.vdot(c, f2 @ c).real for c in vectors.T])
    b = np.array([np.vdot(c, fz @ c).real for c in vectors.T])
    return a, b


def track_levels(model, bz_values):
    """Follow states along a field sweep by maximal overlap.

    Returns (energies[n_bz, 8] in the label order of the first point,
    labels, min_overlap[n_bz-1]).
    """
    bz_values = np.asarray(bz_values, dtype=float)
    first = levels(model, bz_values[0])
    labels = first.labels
    prev = first.vectors
    out = np.empty((len(bz_values), 8))
    out[0] = first.energies
    worst = np.ones(len(bz_values) - 1)
    for i, bz in enumerate(bz_values[1:], start=1):
        cur = levels(model, bz)
        ov = np.abs(prev.conj().T @ cur.vectors) ** 2
        rows, cols = linear_sum_assignment(-ov)
        perm = cols[np.argsort(rows)]
        out[i] = cur.energies[perm]
        worst[i - 1] = ov[np.arange(8), perm].min()
        prev = cur.vectors[:, perm]
    return out, labels, worst


def magic_field(model, level_i=(2, 1), level_j=(1, -1), bracket=(0.5, 6.0), offset=None, maximize=False):
    """Field where E_i - E_j - offset is extremal inside ``bracket``.

    ``offset`` defaults to 2A. Returns (Bz*, extremal value).
    """
    if offset is None:
        offset = 2 * model.A
    sign = -1.0 if maximize else 1.0

    def gap(bz):
        lv = levels(model, bz)
        return sign * (lv.energy(level_i) - lv.energy(level_j) - offset)

    lo, hi = bracket
    r = opt.minimize_scalar(gap, bounds=(lo, hi), method="bounded", options={"xatol": 1e-9})
    edge = 1e-4 * (hi - lo)
    if not r.success or r.x - lo < edge or hi - r.x < edge:
        raise ValueError(f"no interior extremum in bracket {bracket}")
    return float(r.x), sign * float(r.fun)


def transition_matrix(model, bz, bac):
    """T = V^dagger H1 V in the h0 eigenbasis at ``bz`` (ascending energy)."""
    lv = levels(model, bz)
    v = lv.vectors
    return v.conj().T @ (h1(model, bac) @ v), lv


@dataclass(frozen=True)
class RwaParams:
    Ei: float
    Ej: float
    Tij: complex
    omega: float
    hbar: float = constants.HBAR_MHZ

    @property
    def delta(self):
        return self.omega - (self.Ei - self.Ej) / self.hbar

    @property
    def rabi(self):
        return float(np.sqrt(abs(self.Tij) ** 2 / self.hbar**2 + self.delta**2))


def rwa_evolve(p, psi_i0, psi_j0, t):
    """Closed-form two-level amplitudes in the rotating-wave approximation."""
    t = np.asarray(t, dtype=float)
    d, om, hb = p.delta, p.rabi, p.hbar
    c = np.cos(om * t / 2)
    s = np.sin(om * t / 2)
    if om == 0.0:
        return psi_i0 * np.ones_like(c, dtype=complex), psi_j0 * np.ones_like(c, dtype=complex)
    pi = np.exp(-0.5j * d * t) * (psi_i0 * c + 1j * (d / om * psi_i0 - p.Tij / (hb * om) * psi_j0) * s)
    pj = np.exp(0.5j * d * t) * (psi_j0 * c - 1j * (d / om * psi_j0 + np.conj(p.Tij) / (hb * om) * psi_i0) * s)
    return pi, pj


def rwa_rhs(p):
    """Derivative of (psi_i, psi_j) under the rotating-wave equations."""
    w = (p.Ei - p.Ej) / p.hbar - p.omega
    tij = p.Tij

    def f(t, y):
        ph = np.exp(1j * w * t)
        return np.array([0.5 * y[1] * ph * tij, 0.5 * y[0] * np.conj(ph) * np.conj(tij)]) / (1j * p.hbar)

    return f


def interaction_picture_rhs(model, bz, bac, omega, energy_scale=1.0, hbar=constants.HBAR_MHZ):
    """Derivative of the 8 interaction-picture amplitudes (ascending-energy order).

    ``energy_scale`` multiplies the h0 eigenvalues; it lets tests run the
    driven problem at a reduced carrier frequency.
    """
    T, lv = transition_matrix(model, bz, bac)
    e = lv.energies * energy_scale
    wij = (e[:, None] - e[None, :]) / hbar  # (E_i - E_j)/hbar

    def f(t, y):
        phase = np.exp(-1j * (-wij - omega) * t) + np.exp(1j * (wij - omega) * t)
        return (0.5 * (phase * T) @ y) / (1j * hbar)

    return f, lv


def dressed_energies(p, n_photons=0):
    """(E+, E-) of the driven two-level system with n photons."""
    base = p.Ei + n_photons * p.hbar * p.omega
    return base + p.hbar * (p.delta + p.rabi) / 2, base + p.hbar * (p.delta - p.rabi) / 2
