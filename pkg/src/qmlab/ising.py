"""Spin rings: transverse-field Ising, XY and Heisenberg couplings.

H = -(b/2) sum_k F^(k) - sum_k C(k, k+1), site N+1 == site 1. The field
operator F is S_x for the Ising ring and S_z for the XY and Heisenberg rings.
"""

import threading
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .composite import embed, entanglement_entropy, product_state, reduced_density_last_site
from .linalg import EigenResult, as_sparse, eigs_smallest
from .spin import SpinSpec, sx, sy, sz

KINDS = ("ising", "xy", "heisenberg")
MAX_DIM = 2**22
# ground doublets closer than this are treated as degenerate
CLUSTER_TOL = 1e-6


@dataclass(frozen=True)
class RingModel:
    s: SpinSpec
    n_sites: int
    kind: str = "ising"

    def __post_init__(self):
        object.__setattr__(self, "s", SpinSpec.of(self.s))
        if self.n_sites < 3:
            raise ValueError(f"a ring needs at least 3 sites, got {self.n_sites}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown coupling kind {self.kind!r}; choose from {KINDS}")
        if self.dim > MAX_DIM:
            raise ValueError(f"Hilbert dimension {self.dim} exceeds limit {MAX_DIM}")

    @property
    def dim(self):
        return self.s.dim**self.n_sites

    @property
    def dims(self):
        return (self.s.dim,) * self.n_sites


def site_op(model, op, k):
    """Single-spin operator ``op`` ('x', 'y' or 'z') on site k (1-based, periodic)."""
    return _site_op(model.s.two_s, model.n_sites, op, (k - 1) % model.n_sites + 1)


@lru_cache(maxsize=512)
def _site_op(two_s, n, op, k):
    f = {"x": sx, "y": sy, "z": sz}[op]
    return embed((two_s + 1,) * n, k, f(two_s / 2))


@lru_cache(maxsize=16)
def _parts(kind, two_s, n):
    model = RingModel(SpinSpec(two_s), n, kind)
    field_axis = "x" if kind == "ising" else "z"
    bond_axes = {"ising": "z", "xy": "xy", "heisenberg": "xyz"}[kind]
    ops = {a: [site_op(model, a, k) for k in range(1, n + 1)] for a in set(field_axis + bond_axes)}
    field = sum(ops[field_axis])
    bonds = sum(ops[a][k] @ ops[a][(k + 1) % n] for a in bond_axes for k in range(n))
    return as_sparse(field), as_sparse(bonds)


def hamiltonian(model, b):
    field, bonds = _parts(model.kind, model.s.two_s, model.n_sites)
    return as_sparse(-(b / 2) * field - bonds)


def _xup(spec):
    s = spec.two_s
    return np.array([np.sqrt(comb(s, k)) for k in range(s, -1, -1)], dtype=complex) / 2 ** (s / 2)


def _xdn(spec):
    # M + S runs 2S ... 0 in basis order
    s = spec.two_s
    return np.array([(-1) ** k * np.sqrt(comb(s, k)) for k in range(s, -1, -1)], dtype=complex) / 2 ** (s / 2)


def single_site_states(s):
    """x-up, x-down, z-up, z-down vectors of one spin."""
    spec = SpinSpec.of(s)
    zup = np.zeros(spec.dim, dtype=complex)
    zdn = np.zeros(spec.dim, dtype=complex)
    zup[0] = 1.0
    zdn[-1] = 1.0
    return {"xup": _xup(spec), "xdn": _xdn(spec), "zup": zup, "zdn": zdn}


def asymptotic_states(model):
    """Product ground states of the Ising ring in its limits b=0 and b=+-inf."""
    one = single_site_states(model.s)
    n = model.n_sites
    return {
        "gs0up": product_state([one["zup"]] * n),
        "gs0dn": product_state([one["zdn"]] * n),
        "gsplusinf": product_state([one["xup"]] * n),
        "gsminusinf": product_state([one["xdn"]] * n),
    }


_memo = {}
_memo_lock = threading.Lock()


def clear_cache():
    with _memo_lock:
        _memo.clear()


def ground(model, b, m_states=1, memo=True):
    """Lowest ``m_states`` eigenpairs at field ``b``.

    For the Ising ring a (near-)degenerate ground doublet is resolved with ten
    states and rotated onto eigenvectors of the global flip M -> -M, keeping
    the sector that is continuously connected to the b > 0 or b < 0 ground
    state. Results are memoized per (kind, S, N, b, m_states).
    """
    if m_states < 1:
        raise ValueError("m_states must be >= 1")
    key = (model.kind, model.s.two_s, model.n_sites, round(float(b), 12), m_states)
    if memo:
        with _memo_lock:
            hit = _memo.get(key)
        if hit is not None:
            return hit
    res = _solve(model, float(b), m_states)
    if memo:
        with _memo_lock:
            _memo[key] = res
    return res


def _solve(model, b, m_states):
    h = hamiltonian(model, b)
    want = min(model.dim, max(m_states, 2))
    res = eigs_smallest(h, want)
    w, v = res.eigenvalues, res.eigenvectors
    if model.kind == "ising" and w[1] - w[0] < CLUSTER_TOL:
        res = eigs_smallest(h, min(model.dim, max(m_states, 10)))
        w, v = _flip_symmetrize(model, b, res.eigenvalues, res.eigenvectors)
    return EigenResult(w[:m_states].copy(), v[:, :m_states].copy())


def _flip_symmetrize(model, b, w, v):
    size = int(np.sum(w - w[0] < CLUSTER_TOL))
    if size < 2:
        return w, v
    block = v[:, :size]
    flip = block.conj().T @ block[::-1]
    parity, u = np.linalg.eigh(0.5 * (flip + flip.conj().T))
    target = 1.0 if b >= 0 else (-1.0) ** (model.s.two_s * model.n_sites)
    order = np.argsort(np.abs(parity - target))
    rot = block @ u[:, order]
    hb = hamiltonian(model, b)
    e = np.array([np.vdot(c, hb @ c).real for c in rot.T])
    w = w.copy()
    v = v.copy()
    w[:size] = e
    v[:, :size] = rot
    return w, v


def magnetization(model, psi):
    """<S_x>, <S_y>, <S_z> on every site, arrays of length N."""
    out = {}
    for a in "xyz":
        out["m" + a] = np.array([np.vdot(psi, site_op(model, a, k) @ psi).real for k in range(1, model.n_sites + 1)])
    return out


def correlation(model, psi, k, kp):
    """<S(k).S(k')> - <S(k)>.<S(k')>."""
    total = 0.0
    for a in "xyz":
        ok = site_op(model, a, k)
        okp = site_op(model, a, kp)
        both = np.vdot(psi, ok @ (okp @ psi)).real
        total += both - np.vdot(psi, ok @ psi).real * np.vdot(psi, okp @ psi).real
    return float(total)


def observables(model, b, m_states=2):
    """Gap, asymptotic overlaps, magnetization, correlations and entropy of the ground state."""
    res = ground(model, b, max(m_states, 2))
    psi = res.vector(0)
    ref = asymptotic_states(model)
    ov = {k: abs(np.vdot(v, psi)) ** 2 for k, v in ref.items()}
    cat_p = (ref["gs0up"] + ref["gs0dn"]) / np.sqrt(2)
    cat_m = (ref["gs0up"] - ref["gs0dn"]) / np.sqrt(2)
    out = {
        "E0": float(res.eigenvalues[0]),
        "E1": float(res.eigenvalues[1]),
        "gap": float(res.eigenvalues[1] - res.eigenvalues[0]),
        "overlap_minus_inf": ov["gsminusinf"],
        "overlap_plus_inf": ov["gsplusinf"],
        "overlap_cat_plus": abs(np.vdot(cat_p, psi)) ** 2,
        "overlap_cat_minus": abs(np.vdot(cat_m, psi)) ** 2,
        "overlap_cat_sum": ov["gs0up"] + ov["gs0dn"],
    }
    out.update(magnetization(model, psi))
    out["C"] = np.array([correlation(model, psi, 1, 1 + d) for d in range(1, model.n_sites // 2 + 1)])
    out["entropy"] = entanglement_entropy(reduced_density_last_site(psi, model.dims))
    return out
