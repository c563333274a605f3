"""Simulation designs: sparse precision topologies, Gaussian sampling, a
random-precision sampler, and a near-singular Wishart covariance draw.

All generators assert SPD (or PSD for Wishart draws) before returning and
take an explicit numpy Generator so streams are reproducible; independent
replications should split seeds with spawn_rngs.
"""

import numpy as np
import scipy.linalg

from .linalg import NotPositiveDefiniteError

GEOMETRIC_PARAM = 0.05
GEOMETRIC_CAP = 105
EIG_SHIFT_TARGET = 0.02


def spawn_rngs(seed, count):
    """Independent child generators for parallel/replicated runs."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _assert_spd(c, what):
    eig = np.linalg.eigvalsh(0.5 * (c + c.T))
    if eig[0] <= 0:
        raise NotPositiveDefiniteError(f"{what}: min eigenvalue {eig[0]:.3e} <= 0")
    return c


def gaussian_sample(c, n, rng):
    """n i.i.d. rows from N(0, C^-1), C given as an SPD precision matrix."""
    c = np.asarray(c, dtype=float)
    p = c.shape[0]
    try:
        L = scipy.linalg.cholesky(0.5 * (c + c.T), lower=True)
    except np.linalg.LinAlgError as e:
        raise NotPositiveDefiniteError(str(e))
    if n == 0:
        return np.empty((0, p))
    z = rng.standard_normal((n, p))
    # cov(x) = L^-T L^-1 = C^-1 for x = L^-T z
    return scipy.linalg.solve_triangular(L, z.T, lower=True, trans="T").T


def star_precision(p, hub_first=True, strength=None):
    """Hub-and-spokes precision: unit diagonal, one row/column of edges.

    The default strength 0.5/sqrt(p-1) keeps the matrix diagonally dominant
    (eigenvalues 1 +- 0.5), hence SPD.
    """
    if p < 2:
        raise ValueError("p must be at least 2")
    if strength is None:
        strength = 0.5 / np.sqrt(p - 1)
    hub = 0 if hub_first else p - 1
    c = np.eye(p)
    c[hub, :] = strength
    c[:, hub] = strength
    c[hub, hub] = 1.0
    return _assert_spd(c, "star precision (strength too large)")


def ar_precision(p, variant="ar1", rho=0.7, phi=(0.4, 0.2), long_range=0.2):
    """Banded autoregressive-style precision matrices, unit variance scale.

    ar1: exact tridiagonal inverse of the covariance rho^|i-j|.
    ar2: pentadiagonal T'T for the unit-diagonal band-2 innovation filter
         with taps -phi.
    ar1_long: the ar1 matrix plus one long-range edge between the first and
         last variables.
    """
    if p < 2:
        raise ValueError("p must be at least 2")
    if variant in ("ar1", "ar1_long"):
        if not -1 < rho < 1:
            raise ValueError("rho must lie in (-1, 1)")
        c = np.zeros((p, p))
        s = 1.0 / (1.0 - rho * rho)
        np.fill_diagonal(c, s * (1.0 + rho * rho))
        c[0, 0] = c[-1, -1] = s
        idx = np.arange(p - 1)
        c[idx, idx + 1] = c[idx + 1, idx] = -s * rho
        if variant == "ar1_long":
            c[0, -1] = c[-1, 0] = long_range
    elif variant == "ar2":
        t = np.eye(p)
        idx = np.arange(p - 1)
        t[idx + 1, idx] = -phi[0]
        idx = np.arange(p - 2)
        t[idx + 2, idx] = -phi[1]
        c = t.T @ t
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return _assert_spd(c, f"{variant} precision")


def truncated_geometric_mean(lam=GEOMETRIC_PARAM, cap=GEOMETRIC_CAP):
    """Mean of Geometric(lam) on {1,..} conditioned to k <= cap."""
    k = np.arange(1, cap + 1)
    pmf = lam * (1 - lam) ** (k - 1)
    pmf /= pmf.sum()
    return float(np.dot(k, pmf))


def sample_truncated_geometric(rng, lam=GEOMETRIC_PARAM, cap=GEOMETRIC_CAP):
    """Geometric(lam) on {1,2,...} conditioned to [1, cap] by rejection."""
    while True:
        n = int(rng.geometric(lam))
        if 1 <= n <= cap:
            return n


def sample_random_precision(p=15, rng=None):
    """Random sparse SPD precision matrix.

    Draws 20 observations from the equicorrelated precision I + ones, takes
    G = (X'X)^-1, keeps N ~ truncated-Geometric(0.05) random symmetric
    off-diagonal entries of G (zeroing the rest of the off-diagonal), and
    shifts the diagonal so the smallest eigenvalue is at least 0.02.
    """
    if rng is None:
        rng = np.random.default_rng()
    c0 = np.eye(p) + np.ones((p, p))
    x = gaussian_sample(c0, 20, rng)
    g = np.linalg.inv(x.T @ x)
    n_edges = sample_truncated_geometric(rng)
    all_pairs = [(j, k) for j in range(p) for k in range(j + 1, p)]
    n_edges = min(n_edges, len(all_pairs))
    keep = rng.choice(len(all_pairs), size=n_edges, replace=False)
    h = np.diag(np.diag(g)).copy()
    for i in keep:
        j, k = all_pairs[i]
        h[j, k] = h[k, j] = g[j, k]
    shift = max(0.0, EIG_SHIFT_TARGET - float(np.linalg.eigvalsh(h)[0]))
    c = h + shift * np.eye(p)
    return _assert_spd(c, "random precision")


def ar_covariance_bar(p, base=0.99):
    """The geometric-decay covariance [base^|i-j|]."""
    idx = np.arange(p)
    return base ** np.abs(idx[:, None] - idx[None, :])


def wishart_near_singular(df=40, p=30, rng=None, base=0.99):
    """Near-singular Wishart covariance draw with expected value base^|i-j|.

    Bartlett construction: Sigma = A A' with A = L T / sqrt(df), where L is
    the Cholesky factor of the scale and T the lower-triangular Bartlett
    matrix (chi draws on the diagonal, normals below).
    """
    if rng is None:
        rng = np.random.default_rng()
    if df < p:
        raise ValueError("degrees of freedom must be at least p")
    sbar = ar_covariance_bar(p, base)
    L = scipy.linalg.cholesky(sbar, lower=True)
    t = np.zeros((p, p))
    tril = np.tril_indices(p, k=-1)
    t[tril] = rng.standard_normal(len(tril[0]))
    t[np.diag_indices(p)] = np.sqrt(rng.chisquare(df - np.arange(p)))
    a = (L @ t) / np.sqrt(df)
    sigma = a @ a.T
    return 0.5 * (sigma + sigma.T)
