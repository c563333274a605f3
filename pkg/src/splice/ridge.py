"""l2-regularized symmetric pseudo-likelihood estimate with a PSD guarantee.

The estimate I - Bt is defined as the solution U of the stationarity system

    (G + lam2 I)(I - Bt) + Theta + Omega = 0,
    theta_jj = -(G_jj + lam2),  Omega anti-symmetric,  Bt symmetric,

whose symmetric part is the Lyapunov equation V U + U V = 2 diag(V) with
V = G + lam2 I. Since V is SPD and the right-hand side is PD, U is positive
definite (sign propagation: U = \\int exp(-Vt) W exp(-Vt) dt), so the
precision estimate D^-1 U D^-1 is PSD for every lam2 > 0 and every positive
diagonal D. The diagonal of Bt is zero only up to O(|offdiag(G)|^2 / lam2);
the plain penalized least-squares minimizer with an exactly zero diagonal
does not admit this guarantee.

For orthogonal designs the system gives Bt = 0 exactly, and for large lam2
it agrees with ridge shrinkage Bt_jk ~ G_jk / lam2.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .linalg import check_symmetric, symmetric_eigenvalues

PSD_TOL = 1e-9


@dataclass
class RidgeEstimate:
    btilde: np.ndarray
    lambda2: float
    d2: np.ndarray

    @property
    def min_eigenvalue(self):
        p = self.btilde.shape[0]
        return float(symmetric_eigenvalues(np.eye(p) - self.btilde)[0])


def fit_ridge(xtilde, lambda2):
    """Solve V U + U V = 2 diag(V) for U = I - Bt, V = Xt'Xt + lam2 I."""
    if lambda2 <= 0:
        raise ValueError("lambda2 must be strictly positive")
    xtilde = np.asarray(xtilde, dtype=float)
    n, p = xtilde.shape
    v = xtilde.T @ xtilde
    v[np.diag_indices(p)] += lambda2
    w = 2.0 * np.diag(np.diag(v))
    u = scipy.linalg.solve_continuous_lyapunov(v, w)
    u = 0.5 * (u + u.T)
    return RidgeEstimate(np.eye(p) - u, float(lambda2), np.ones(p))


def kkt_residual(xtilde, est):
    """Decompose (G + lam2 I)(I - Bt) + Theta + Omega = 0.

    Theta is the prescribed diagonal -(G_jj + lam2); Omega is read off the
    anti-symmetric part; the returned remainder (symmetric part minus
    -Theta) should vanish at the solution.
    """
    xtilde = np.asarray(xtilde, dtype=float)
    p = est.btilde.shape[0]
    v = xtilde.T @ xtilde
    v[np.diag_indices(p)] += est.lambda2
    m = v @ (np.eye(p) - est.btilde)
    theta = -np.diag(v).copy()
    omega = -0.5 * (m - m.T)
    rem = 0.5 * (m + m.T) - np.diag(np.diag(v))
    return theta, omega, rem


def verify_psd_lemma(u, v, w, identity_tol=1e-8):
    """Check the sign propagation U V + V U = W, V SPD, W PSD => U PSD.

    Validates the identity precondition, then reports whether min eig(U)
    clears -1e-9.
    """
    u = check_symmetric(u)
    v = check_symmetric(v)
    w = check_symmetric(w)
    lhs = u @ v + v @ u
    scale = max(np.max(np.abs(w)), 1.0)
    if np.max(np.abs(lhs - w)) > identity_tol * scale:
        raise ValueError("identity UV + VU = W violated beyond tolerance")
    if symmetric_eigenvalues(v)[0] <= 0:
        raise ValueError("V must be strictly positive definite")
    if symmetric_eigenvalues(w)[0] < -identity_tol * scale:
        raise ValueError("W must be positive semi-definite")
    return bool(symmetric_eigenvalues(u)[0] >= -PSD_TOL)
