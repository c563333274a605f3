"""Independent brute-force solvers used as oracles by the test suite.

These stay deliberately simple and separate from the package internals:
coordinate descent with a duality-gap certificate for the weighted LASSO,
and an eigendecomposition solver for the Lyapunov system defining the
l2-regularized symmetric estimate.
"""

import numpy as np


def soft_threshold(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def cd_lasso(Z, y, weights, lam, gap_tol=1e-10, max_iter=200000):
    """Minimize ||y - Zb||^2 + lam * sum w_j |b_j| by coordinate descent.

    Runs until the duality gap certificate drops below gap_tol.
    """
    Z = np.asarray(Z, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(weights, dtype=float)
    n, q = Z.shape
    norms = np.einsum("ij,ij->j", Z, Z)
    b = np.zeros(q)
    r = y.copy()
    for it in range(max_iter):
        for j in range(q):
            old = b[j]
            rho = 2.0 * np.dot(Z[:, j], r) + 2.0 * norms[j] * old
            new = soft_threshold(rho, lam * w[j]) / (2.0 * norms[j])
            if new != old:
                r -= Z[:, j] * (new - old)
                b[j] = new
        if it % 5 == 0 and duality_gap(Z, y, w, lam, b, r) <= gap_tol:
            break
    return b


def duality_gap(Z, y, w, lam, b, r=None):
    if r is None:
        r = y - Z @ b
    corr = 2.0 * np.abs(Z.T @ r) / w
    mx = corr.max()
    s = 1.0 if mx <= lam else lam / mx
    primal = np.dot(r, r) + lam * np.sum(w * np.abs(b))
    dual = 2.0 * s * np.dot(r, y) - s * s * np.dot(r, r)
    return primal - dual


def lyapunov_eig_solve(V, W):
    """Solve V U + U V = W for symmetric U by eigendecomposition of SPD V.

    With V = A diag(lams) A', the solution in the eigenbasis is
    (A' W A)_ij / (lams_i + lams_j).
    """
    lams, A = np.linalg.eigh(V)
    if lams[0] <= 0:
        raise ValueError("V must be strictly positive definite")
    Wt = A.T @ W @ A
    U = A @ (Wt / (lams[:, None] + lams[None, :])) @ A.T
    return 0.5 * (U + U.T)
