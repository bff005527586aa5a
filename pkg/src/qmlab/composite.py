"""Tensor-product spaces: site embedding, product states, partial traces."""

from functools import reduce

import numpy as np
import scipy.sparse as sp

from .linalg import kron


def total_dim(dims):
    return int(np.prod(dims))


def embed(dims, site, a):
    """Place operator ``a`` at ``site`` (1-based) with identities elsewhere."""
    dims = [int(d) for d in dims]
    if not 1 <= site <= len(dims):
        raise IndexError(f"site {site} outside 1..{len(dims)}")
    if any(d < 1 for d in dims):
        raise ValueError(f"site dimensions must be positive: {dims}")
    if a.shape != (dims[site - 1], dims[site - 1]):
        raise ValueError(f"operator shape {a.shape} does not fit site dim {dims[site - 1]}")
    left = total_dim(dims[: site - 1])
    right = total_dim(dims[site:])
    return kron([sp.identity(left), a, sp.identity(right)])


def product_state(states):
    states = [np.asarray(s, dtype=complex) for s in states]
    if not states:
        raise ValueError("product_state needs at least one factor")
    for s in states:
        if not np.any(s):
            raise ValueError("zero vector in product state")
    return reduce(np.kron, states)


def _validate(psi, dims):
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (total_dim(dims),):
        raise ValueError(f"state length {psi.shape} does not match layout {list(dims)}")
    return psi


def reduced_density_prefix(psi, dims, n_sites):
    """Reduced density matrix of the first ``n_sites`` sites."""
    psi = _validate(psi, dims)
    da = total_dim(dims[:n_sites])
    g = psi.reshape(da, -1)
    return g @ g.conj().T


def reduced_density_suffix(psi, dims, n_sites):
    """Reduced density matrix of the last ``n_sites`` sites."""
    psi = _validate(psi, dims)
    db = total_dim(dims[len(dims) - n_sites:])
    g = psi.reshape(-1, db)
    return g.T @ g.conj()


def reduced_density_first_site(psi, dims):
    return reduced_density_prefix(psi, dims, 1)


def reduced_density_last_site(psi, dims):
    return reduced_density_suffix(psi, dims, 1)


def check_density_matrix(rho, tol=1e-10):
    """Raise if ``rho`` is not Hermitian, unit-trace and positive."""
    rho = np.asarray(rho)
    if np.abs(rho - rho.conj().T).max() > 1e-12 * max(1.0, np.abs(rho).max()):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValueError(f"density matrix trace {np.trace(rho)} != 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("density matrix has negative eigenvalues")
    return rho


def entanglement_entropy(rho):
    """Von Neumann entropy in bits; eigenvalues clamped into [0, 1]."""
    lam = np.clip(np.linalg.eigvalsh(np.asarray(rho)), 0.0, 1.0)
    lam = lam[lam > 0]
    return float(-(lam * np.log2(lam)).sum()) + 0.0


def purity(rho):
    rho = np.asarray(rho)
    return float(np.real(np.trace(rho @ rho)))


def expectation(op, psi):
    psi = np.asarray(psi, dtype=complex)
    return complex(np.vdot(psi, op @ psi))

