"""Monte Carlo integration and path-integral sampling of the harmonic oscillator.

Paths use dimensionless coordinates x/x_hat with x_hat = sqrt(hbar/(m w)) and
the inverse temperature zeta = beta hbar w. An open path has M+1 beads with
fixed ends; a closed ring has M beads and bead M is bead 0 again.
"""

from dataclasses import dataclass, field
from math import exp

import numpy as np
from scipy import special, stats

DEFAULT_SEED = 20240517
BURN_IN = 0.1


def make_rng(seed=DEFAULT_SEED):
    """PCG64 stream; the same seed gives the same draws bit for bit."""
    return np.random.default_rng(seed)


@dataclass
class ChainStats:
    accepted: dict = field(default_factory=dict)
    rejected: dict = field(default_factory=dict)

    def record(self, kind, ok):
        book = self.accepted if ok else self.rejected
        book[kind] = book.get(kind, 0) + 1

    def proposals(self, kind):
        return self.accepted.get(kind, 0) + self.rejected.get(kind, 0)

    def ratio(self, kind):
        n = self.proposals(kind)
        return self.accepted.get(kind, 0) / n if n else float("nan")

    def merge(self, other):
        out = ChainStats(dict(self.accepted), dict(self.rejected))
        for k, v in other.accepted.items():
            out.accepted[k] = out.accepted.get(k, 0) + v
        for k, v in other.rejected.items():
            out.rejected[k] = out.rejected.get(k, 0) + v
        return out

    def as_dict(self):
        kinds = sorted(set(self.accepted) | set(self.rejected))
        return {
            k: {"accepted": self.accepted.get(k, 0), "rejected": self.rejected.get(k, 0), "ratio": self.ratio(k)}
            for k in kinds
        }


# actions ----------------------------------------------------------------


def action(beads, zeta):
    """Dimensionless HO action of an open path x_0 .. x_M (end beads weighted 1/2)."""
    x = np.asarray(beads, dtype=float)
    m = len(x) - 1
    if m < 1:
        raise ValueError("a path needs at least two beads")
    if zeta <= 0:
        raise ValueError("zeta must be positive")
    pot = x[0] ** 2 / 2 + np.sum(x[1:-1] ** 2) + x[-1] ** 2 / 2
    kin = np.sum(np.diff(x) ** 2)
    return 0.5 * (zeta / m * pot + m / zeta * kin)


def closed_action(ring, zeta):
    """Action of a ring, evaluated as the open path with the first bead appended."""
    ring = np.asarray(ring, dtype=float)
    if len(ring) < 2:
        raise ValueError("a ring needs at least two beads")
    return action(np.append(ring, ring[0]), zeta)


# plain and weighted Monte Carlo integration ---------------------------------


def _evaluate(f, x):
    y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        y = np.array([f(v) for v in x], dtype=float)
    return y


def mc_integrate(f, M, rng):
    """Mean of f over M uniform draws on [0, 1) and its standard error."""
    if M < 2:
        raise ValueError("need at least two samples")
    fx = _evaluate(f, rng.random(M))
    return float(np.mean(fx)), float(np.sqrt(np.var(fx, ddof=1) / M))


def mc_integrate_weighted(f, inverse_cdf, M, rng):
    """Importance-sampled integral: f evaluated at inverse_cdf(z) for uniform z."""
    if M < 2:
        raise ValueError("need at least two samples")
    x = _evaluate(inverse_cdf, rng.random(M))
    fx = _evaluate(f, x)
    return float(np.mean(fx)), float(np.sqrt(np.var(fx, ddof=1) / M))


def mh_chain(p, x1, d, M, rng, lo=0.0, hi=1.0):
    """Metropolis chain of length M for the unnormalized weight p on [lo, hi].

    Proposals are x + U(-d, d); anything outside the domain has P = 0.
    """
    if d <= 0:
        raise ValueError("step size must be positive")
    if M < 1:
        raise ValueError("chain length must be positive")
    out = np.empty(M)
    out[0] = x = float(x1)
    px = p(x)
    st = ChainStats()
    steps = rng.uniform(-d, d, M - 1)
    ws = rng.random(M - 1)
    for i in range(M - 1):
        y = x + steps[i]
        if y < lo or y > hi:
            prob = 0.0
        else:
            py = p(y)
            prob = 1.0 if py >= px else py / px
        if prob > ws[i]:
            x, px = y, py
            st.record("step", True)
        else:
            st.record("step", False)
        out[i + 1] = x
    return out, st


def metropolis_matrix(weights, max_jump=1):
    """Exact transition matrix of a Metropolis walk on a finite lattice.

    Proposals jump by k in [-max_jump, max_jump] \\ {0} uniformly; moves off the
    lattice are rejected. Rows sum to one.
    """
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    n = len(w)
    jumps = [k for k in range(-max_jump, max_jump + 1) if k != 0]
    t = np.zeros((n, n))
    for i in range(n):
        for k in jumps:
            j = i + k
            if 0 <= j < n:
                t[i, j] += min(1.0, w[j] / w[i]) / len(jumps)
        t[i, i] = 1.0 - t[i].sum()
    return t


def stationary(t):
    """Left eigenvector of a row-stochastic matrix for eigenvalue 1, summing to one."""
    w, v = np.linalg.eig(np.asarray(t).T)
    k = int(np.argmin(np.abs(w - 1)))
    s = np.real(v[:, k])
    return s / s.sum()


# path ensembles ---------------------------------------------------------------


def sample_open_paths(x0, xM, M, zeta, d, count, rng, burn_in=BURN_IN):
    """Open paths with fixed ends; one path recorded per sweep of M-1 bead moves.

    Returns (paths[count, M+1], ChainStats).
    """
    if M < 2:
        raise ValueError("M must be >= 2")
    if zeta <= 0 or d <= 0:
        raise ValueError("zeta and d must be positive")
    x = list(x0 + np.arange(M + 1) / M * (xM - x0))
    a = zeta / M
    b = M / zeta
    inner = M - 1
    skip = int(round(burn_in * count))
    total = count + skip
    out = np.empty((count, M + 1))
    st = ChainStats()
    for s in range(total):
        idx = rng.integers(1, M, inner)
        dx = rng.uniform(-d, d, inner)
        ws = rng.random(inner)
        for i in range(inner):
            m = idx[i]
            old = x[m]
            new = old + dx[i]
            left, right = x[m - 1], x[m + 1]
            ds = 0.5 * (
                a * (new * new - old * old)
                + b * ((new - left) ** 2 + (new - right) ** 2 - (old - left) ** 2 - (old - right) ** 2)
            )
            if ds <= 0 or exp(-ds) > ws[i]:
                x[m] = new
                st.record("bead", True)
            else:
                st.record("bead", False)
        if s >= skip:
            out[s - skip] = x
    return out, st


def default_slices(zeta):
    """Slice count for a bead-variance Trotter error of about zeta^2/(8 M^2) <= 0.5%.

    More slices cut the bias further but local moves decorrelate the long ring
    modes in a time growing like M^2, so fewer independent rings per run.
    """
    return max(20, int(np.ceil(5 * zeta)))


def default_steps(zeta, M):
    """(d1, d2): three standard deviations of a single bead and of the ring centre."""
    sigma_bead = 1.0 / np.sqrt(zeta / M + 2 * M / zeta)
    return 3 * sigma_bead, 3 / np.sqrt(zeta)


@dataclass
class RingEnsemble:
    rings: np.ndarray  # (count, M)
    stats: ChainStats
    zeta: float
    seed: object = None

    @property
    def M(self):
        return self.rings.shape[1]


def sample_closed_paths(x_start, M, zeta, d1, d2, f_mix, count, rng, burn_in=BURN_IN):
    """Closed rings; one ring recorded per sweep of M moves.

    Each move is a single-bead shift (probability f_mix) or a shift of the whole
    ring. The ring shift is kept as a common offset so every move costs O(1).
    """
    if M < 2:
        raise ValueError("M must be >= 2")
    if not 0 <= f_mix <= 1:
        raise ValueError("f_mix must lie in [0, 1]")
    if zeta <= 0 or d1 <= 0 or d2 <= 0:
        raise ValueError("zeta, d1 and d2 must be positive")
    y = [0.0] * M
    c = float(x_start)
    a = zeta / M
    b = M / zeta
    skip = int(round(burn_in * count))
    total = count + skip
    out = np.empty((count, M))
    acc1 = rej1 = acc2 = rej2 = 0
    for s in range(total):
        r = rng.random((4, M))
        kind = r[0] < f_mix
        idx = (r[1] * M).astype(int)
        sy = sum(y)
        for i in range(M):
            w = r[3, i]
            if kind[i]:
                m = idx[i]
                dx = d1 * (2 * r[2, i] - 1)
                old = y[m]
                new = old + dx
                left = y[m - 1]
                right = y[m + 1] if m + 1 < M else y[0]
                xo = old + c
                ds = 0.5 * (
                    a * ((xo + dx) ** 2 - xo * xo)
                    + b * ((new - left) ** 2 + (new - right) ** 2 - (old - left) ** 2 - (old - right) ** 2)
                )
                if ds <= 0 or exp(-ds) > w:
                    y[m] = new
                    sy += dx
                    acc1 += 1
                else:
                    rej1 += 1
            else:
                dx = d2 * (2 * r[2, i] - 1)
                # kinetic part is invariant under a rigid shift
                ds = 0.5 * a * (2 * dx * (sy + M * c) + M * dx * dx)
                if ds <= 0 or exp(-ds) > w:
                    c += dx
                    acc2 += 1
                else:
                    rej2 += 1
        if s >= skip:
            out[s - skip] = y
            out[s - skip] += c
    st = ChainStats({"bead": acc1, "ring": acc2}, {"bead": rej1, "ring": rej2})
    return RingEnsemble(out, st, float(zeta))


# analytic density matrices ------------------------------------------------------


def ho_exact(zeta, x, xp):
    """Normalized thermal density matrix <x'|rho|x> of the oscillator (x_hat = 1)."""
    if zeta <= 0:
        raise ValueError("zeta must be positive")
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    th = np.tanh(zeta / 2)
    s = (x + xp) / 2
    d = (x - xp) / 2
    return np.exp(-(s**2) * th - d**2 / th) / np.sqrt(np.pi / th)


def ho_diag(zeta, x):
    return ho_exact(zeta, x, x)


def ho_variance(zeta):
    """<x^2> of the exact thermal density."""
    return 0.5 / np.tanh(zeta / 2)


def ring_variance(zeta, M):
    """<x^2> of a single bead of the discretized M-slice ring."""
    k = np.arange(M)
    return float(np.mean(1.0 / (zeta / M + (M / zeta) * 4 * np.sin(np.pi * k / M) ** 2)))


def ho_finite_m(zeta, M, x, xp):
    """Trotterized density matrix with M slices, normalized to unit trace."""
    if zeta <= 0:
        raise ValueError("zeta must be positive")
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    s2 = ((x + xp) / 2) ** 2
    d2 = ((x - xp) / 2) ** 2
    z = zeta
    if M == 1:
        pre = np.sqrt(z / 2)
        cs, cd = z / 2, (4 + z**2) / (2 * z)
    elif M == 2:
        pre = np.sqrt(z * (16 + z**2) / (4 * (8 + z**2)))
        cs = z / 4 * (16 + z**2) / (8 + z**2)
        cd = (8 + z**2) / (4 * z)
    elif M == 3:
        cs = z / 6 * (27 + z**2) / (9 + z**2)
        pre = np.sqrt(cs)  # unit trace fixes the prefactor from the diagonal exponent
        cd = (9 + z**2) * (36 + z**2) / (6 * z * (27 + z**2))
    else:
        raise ValueError(f"closed forms exist for M in (1, 2, 3), got {M}")
    return pre / np.sqrt(np.pi) * np.exp(-s2 * cs - d2 * cd)


# density estimation -------------------------------------------------------------


def fd_edges(data):
    """Freedman-Diaconis bin edges."""
    data = np.ravel(data)
    return np.histogram_bin_edges(data, bins="fd")


def density_from_rings(rings, bins=None, centered=False):
    """Histogram density of all beads of all rings; returns (centres, density, edges).

    With ``centered`` every ring is first moved so its mean sits at zero.
    """
    rings = np.asarray(rings, dtype=float)
    if rings.size == 0:
        raise ValueError("empty ensemble")
    if rings.ndim == 1:
        rings = rings[None, :]
    if centered:
        rings = rings - rings.mean(axis=1, keepdims=True)
    data = rings.ravel()
    edges = fd_edges(data) if bins is None else np.histogram_bin_edges(data, bins=bins)
    dens, edges = np.histogram(data, bins=edges, density=True)
    return (edges[:-1] + edges[1:]) / 2, dens, edges


def gaussian_bin_probs(edges, variance):
    """Probability mass of a centred normal in each bin."""
    z = np.asarray(edges) / np.sqrt(2 * variance)
    return 0.5 * np.diff(special.erf(z))


@dataclass
class Chi2Result:
    chi2: float  # Hotelling T^2 of the grouped bin fractions
    dof: int
    p_value: float
    inflation: float  # batch variance over iid variance, pooled over groups


def _group_bins(probs, n_groups):
    """Contiguous groups of bins holding roughly equal probability each."""
    target = probs.sum() / n_groups
    labels = np.empty(len(probs), dtype=int)
    g, acc = 0, 0.0
    for i, q in enumerate(probs):
        labels[i] = g
        acc += q
        if acc >= target and g < n_groups - 1:
            g, acc = g + 1, 0.0
    if acc < target / 2 and g > 0:
        labels[labels == g] = g - 1  # fold a thin last group into its neighbour
    return labels


def chi2_rings(rings, edges, probs, n_batches=100, n_groups=20):
    """Goodness of fit of bead positions to bin probabilities ``probs``.

    Beads on one ring and successive rings are correlated, so a plain Pearson
    test over-rejects. The bins are merged into about ``n_groups`` groups of
    similar probability, plus one group for beads outside ``edges``, and the
    group fractions of ``n_batches`` consecutive batches are tested with
    Hotelling's T^2 against their batch covariance. Batches must be longer
    than the autocorrelation time of the chain.
    """
    rings = np.asarray(rings, dtype=float)
    probs = np.asarray(probs, dtype=float)
    per = rings.shape[0] // n_batches
    if per < 1:
        raise ValueError(f"need at least {n_batches} rings")
    labels = _group_bins(probs, n_groups)
    k = labels.max() + 1
    if n_batches <= k + 1:
        raise ValueError("need more batches than groups")
    p = np.bincount(labels, probs, minlength=k)
    p = np.append(p, 1 - p.sum())
    frac = np.empty((n_batches, k + 1))
    n_batch = per * rings.shape[1]
    for b in range(n_batches):
        counts = np.histogram(rings[b * per : (b + 1) * per], bins=edges)[0]
        frac[b, :k] = np.bincount(labels, counts, minlength=k) / n_batch
    frac[:, k] = 1 - frac[:, :k].sum(axis=1)
    if p[k] < 0.5 / n_groups:
        frac, p = frac[:, :k], p[:k]  # too little mass outside the edges for a group
    dev = frac[:, :-1] - p[:-1]  # fractions sum to one: drop a group
    d = dev.mean(axis=0)
    cov = np.cov(dev, rowvar=False)
    dim = dev.shape[1]
    t2 = float(n_batches * d @ np.linalg.solve(cov, d))
    f = (n_batches - dim) / (dim * (n_batches - 1)) * t2
    inflation = float(np.sum(np.var(frac, axis=0, ddof=1)) / np.sum(p * (1 - p) / n_batch))
    return Chi2Result(t2, dim, float(stats.f.sf(f, dim, n_batches - dim)), inflation)
