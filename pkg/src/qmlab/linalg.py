"""Complex linear algebra kernels.

Hamiltonians are carried as ``scipy.sparse`` CSR matrices with complex
entries. Eigensolvers return an :class:`EigenResult` whose eigenvector phases
are fixed so that the largest-magnitude component is real and positive.
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

HERMITIAN_TOL = 1e-12
DENSE_EXPM_MAX = 4096


class ConvergenceError(RuntimeError):
    """Raised by iterative solvers that run out of iterations."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class EigenResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, index-aligned with eigenvalues

    def __len__(self):
        return len(self.eigenvalues)

    def vector(self, k):
        return self.eigenvectors[:, k]


def as_sparse(a):
    """Canonical CSR complex copy of a dense or sparse matrix."""
    m = sp.csr_matrix(a, dtype=complex)
    m.sum_duplicates()
    m.sort_indices()
    return m


def hermitian_defect(a):
    """Largest entrywise deviation between ``a`` and its conjugate transpose."""
    if sp.issparse(a):
        d = (a - a.conj().T).tocoo()
        return float(np.abs(d.data).max()) if d.nnz else 0.0
    a = np.asarray(a)
    return float(np.abs(a - a.conj().T).max()) if a.size else 0.0


def is_hermitian(a, tol=HERMITIAN_TOL):
    scale = max(1.0, _max_abs(a))
    return hermitian_defect(a) <= tol * scale


def _max_abs(a):
    if sp.issparse(a):
        return float(np.abs(a.data).max()) if a.nnz else 0.0
    a = np.asarray(a)
    return float(np.abs(a).max()) if a.size else 0.0


def _require_hermitian(a):
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix is not square: {a.shape}")
    if not is_hermitian(a):
        raise ValueError(f"matrix is not Hermitian (defect {hermitian_defect(a):.3e})")


def norm1(a):
    """Induced 1-norm (largest absolute column sum)."""
    if sp.issparse(a):
        return float(abs(a).sum(axis=0).max()) if a.shape[1] else 0.0
    return float(np.abs(np.asarray(a)).sum(axis=0).max())


def kron(factors):
    """Kronecker product with the leftmost factor varying slowest.

    1-D factors are treated as column vectors and give a 1-D dense result.
    """
    factors = list(factors)
    if not factors:
        raise ValueError("kron needs at least one factor")
    if all(np.ndim(f) == 1 and not sp.issparse(f) for f in factors):
        return reduce(np.kron, [np.asarray(f, dtype=complex) for f in factors])
    mats = [sp.csr_matrix(np.reshape(f, (-1, 1)) if np.ndim(f) == 1 else f, dtype=complex) for f in factors]
    return as_sparse(reduce(lambda x, y: sp.kron(x, y, format="csr"), mats))


def fix_phases(vecs):
    """Make the largest-magnitude component of every column real positive."""
    vecs = np.array(vecs, dtype=complex, copy=True)
    idx = np.argmax(np.abs(vecs), axis=0)
    cols = np.arange(vecs.shape[1])
    pivots = vecs[idx, cols]
    mags = np.abs(pivots)
    phase = np.where(mags > 0, pivots / np.where(mags > 0, mags, 1.0), 1.0)
    return vecs / phase


def eigh_dense(h):
    """Full spectrum of a Hermitian matrix, ascending."""
    _require_hermitian(h)
    a = h.toarray() if sp.issparse(h) else np.asarray(h, dtype=complex)
    a = 0.5 * (a + a.conj().T)
    w, v = sla.eigh(a)
    return EigenResult(w, fix_phases(v))


def eigs_smallest(h, m, tol=1e-10, max_iter=10**6, extra=8, seed=0):
    """The ``m`` algebraically smallest eigenpairs of a Hermitian matrix.

    Block Lanczos with full reorthogonalization and thick restarts. A pair
    counts as converged when its residual is below ``tol * ||H||_1``. If the
    m-th and (m+1)-th eigenvalues are closer than 1e-9 the solve is repeated
    with ``extra`` additional pairs (and a wider block) so that a degenerate
    multiplet is resolved as a whole, then truncated back to ``m``.
    """
    h = as_sparse(h)
    _require_hermitian(h)
    n = h.shape[0]
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= dim, got m={m}, dim={n}")
    scale = norm1(h)
    if scale == 0.0:
        return EigenResult(np.zeros(m), np.eye(n, m, dtype=complex))
    rng = np.random.default_rng(seed)
    want = min(n, m + 1)
    w, v = _thick_restart_lanczos(h, want, min(want, 4), tol * scale, max_iter, rng)
    if want > m and w[m] - w[m - 1] < 1e-9:
        want = min(n, m + extra)
        w, v = _thick_restart_lanczos(h, want, min(want, 10), tol * scale, max_iter, rng)
    return EigenResult(w[:m], fix_phases(v[:, :m]))


def _thick_restart_lanczos(h, nev, block, tol_abs, max_matvec, rng):
    n = h.shape[0]
    ncv = min(n, max(2 * nev + 2 * block + 10, 40))
    V = np.zeros((n, ncv), dtype=complex)
    HV = np.zeros((n, ncv), dtype=complex)
    count = [0, 0]  # filled columns, matvecs

    def append(block_vecs):
        for x in block_vecs.T:
            k = count[0]
            if k == ncv:
                return
            x = np.array(x, dtype=complex)
            for _ in range(3):
                nx = np.linalg.norm(x)
                x = x - V[:, :k] @ (x.conj() @ V[:, :k]).conj()
                nrm = np.linalg.norm(x)
                if nrm > 0.5 * nx:
                    break
            if nrm < 1e-10 * max(nx, 1e-300) or nrm == 0.0:
                # breakdown: continue with a fresh random direction
                x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
                for _ in range(2):
                    x = x - V[:, :k] @ (x.conj() @ V[:, :k]).conj()
                nrm = np.linalg.norm(x)
                if nrm == 0.0:
                    return
            V[:, k] = x / nrm
            HV[:, k] = h @ V[:, k]
            count[0] += 1
            count[1] += 1

    if ncv == n:
        append(np.eye(n, dtype=complex))
    else:
        append(rng.standard_normal((n, block)) + 1j * rng.standard_normal((n, block)))
    best = np.inf
    while True:
        while count[0] < ncv:
            k = count[0]
            before = k
            append(HV[:, max(0, k - block):k])
            if count[0] == before:
                break
        k = count[0]
        proj = V[:, :k].conj().T @ HV[:, :k]
        theta, s = np.linalg.eigh(0.5 * (proj + proj.conj().T))
        Y = V[:, :k] @ s
        HY = HV[:, :k] @ s
        R = HY - Y * theta
        res = np.linalg.norm(R, axis=0)
        worst = float(res[:nev].max())
        best = min(best, worst)
        if worst <= tol_abs or k == n:
            return theta[:nev], Y[:, :nev]
        if count[1] >= max_matvec:
            raise ConvergenceError(
                f"eigensolver did not converge in {count[1]} matrix-vector products", best
            )
        keep = min(k - block, nev + (k - nev) // 2)
        keep = max(keep, nev)
        V[:, :keep] = Y[:, :keep]
        HV[:, :keep] = HY[:, :keep]
        V[:, keep:] = 0.0
        HV[:, keep:] = 0.0
        count[0] = keep
        order = np.argsort(-res[:nev])
        pick = list(order[:block])
        R_pick = R[:, pick]
        append(R_pick)


def expm_action(h, scale, v, tol=1e-12):
    """exp(scale * H) @ v.

    Dense scaling-and-squaring up to dimension 4096, Lanczos-Krylov
    substepping above that.
    """
    h = as_sparse(h)
    v = np.asarray(v, dtype=complex)
    if h.shape[1] != v.shape[0]:
        raise ValueError(f"dimension mismatch: H is {h.shape}, v has {v.shape[0]}")
    n = h.shape[0]
    if n <= DENSE_EXPM_MAX:
        return sla.expm(scale * h.toarray()) @ v
    return _krylov_expm(h, complex(scale), v, tol)


def _krylov_expm(h, scale, v, tol, mmax=40):
    beta0 = np.linalg.norm(v)
    if beta0 == 0.0:
        return v.copy()
    hn = norm1(h)
    # substeps so that each Krylov problem has |scale|*||H||*tau <= 20
    nsub = max(1, int(np.ceil(abs(scale) * hn / 20.0)))
    tau = 1.0 / nsub
    w = v.copy()
    for _ in range(nsub):
        w = _krylov_step(h, scale * tau, w, tol, mmax)
    return w


def _krylov_step(h, s, w, tol, mmax):
    n = h.shape[0]
    beta = np.linalg.norm(w)
    if beta == 0.0:
        return w
    m = min(mmax, n)
    Q = np.zeros((n, m + 1), dtype=complex)
    alpha = np.zeros(m)
    betas = np.zeros(m)
    Q[:, 0] = w / beta
    for j in range(m):
        x = h @ Q[:, j]
        alpha[j] = np.vdot(Q[:, j], x).real
        x = x - Q[:, : j + 1] @ (Q[:, : j + 1].conj().T @ x)
        x = x - Q[:, : j + 1] @ (Q[:, : j + 1].conj().T @ x)
        b = np.linalg.norm(x)
        betas[j] = b
        T = np.diag(alpha[: j + 1]) + np.diag(betas[:j], 1) + np.diag(betas[:j], -1)
        c = sla.expm(s * T)[:, 0]
        if b < 1e-14 or b * abs(c[-1]) < tol:
            return beta * (Q[:, : j + 1] @ c)
        Q[:, j + 1] = x / b
    return beta * (Q[:, :m] @ c)


def ode_rk4(f, y0, t0, t1, steps):
    """Classical fixed-step RK4; returns the (steps+1, dim) trajectory."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    y = np.array(y0, dtype=complex)
    h = (t1 - t0) / steps
    out = np.empty((steps + 1,) + y.shape, dtype=complex)
    out[0] = y
    t = t0
    for i in range(steps):
        k1 = f(t, y)
        k2 = f(t + h / 2, y + h / 2 * k1)
        k3 = f(t + h / 2, y + h / 2 * k2)
        k4 = f(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise FloatingPointError(f"non-finite state at t={t + h}")
        t = t0 + (i + 1) * h
        out[i + 1] = y
    return out
