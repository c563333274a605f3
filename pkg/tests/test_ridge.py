import numpy as np
import pytest

from oracles import lyapunov_eig_solve
from splice.ridge import RidgeEstimate, fit_ridge, kkt_residual, verify_psd_lemma


def test_matches_eigendecomposition_oracle():
    rng = np.random.default_rng(0)
    for _ in range(10):
        n, p = int(rng.integers(3, 25)), int(rng.integers(3, 9))
        x = rng.standard_normal((n, p))
        lam2 = float(rng.uniform(0.05, 3.0))
        est = fit_ridge(x, lam2)
        v = x.T @ x + lam2 * np.eye(p)
        u_or = lyapunov_eig_solve(v, 2.0 * np.diag(np.diag(v)))
        assert np.max(np.abs((np.eye(p) - est.btilde) - u_or)) < 1e-9


def test_estimate_is_symmetric_near_zero_diagonal():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((12, 5))
    est = fit_ridge(x, 5.0)
    assert np.array_equal(est.btilde, est.btilde.T)
    # diagonal vanishes only asymptotically (O(|G_offdiag|^2 / lam2))
    assert np.max(np.abs(np.diag(est.btilde))) < 0.5
    big = fit_ridge(x, 1e6)
    assert np.max(np.abs(np.diag(big.btilde))) < 1e-6


def test_orthonormal_design_gives_zero():
    rng = np.random.default_rng(2)
    q = np.linalg.qr(rng.standard_normal((20, 6)))[0]
    est = fit_ridge(q, 0.8)
    assert np.max(np.abs(est.btilde)) < 1e-12


def test_large_penalty_ridge_shrinkage_limit():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((20, 4))
    g = x.T @ x
    lam2 = 1e8 * np.linalg.norm(g, 2)
    est = fit_ridge(x, lam2)
    assert np.max(np.abs(est.btilde)) <= 1e-4
    offdiag = g - np.diag(np.diag(g))
    assert np.allclose(est.btilde, offdiag / lam2, atol=1e-12)


def test_kkt_decomposition():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((15, 4))
    est = fit_ridge(x, 1.3)
    theta, omega, rem = kkt_residual(x, est)
    assert np.max(np.abs(rem)) < 1e-8
    # diagonal multipliers are minus the penalized column norms: negative
    g = x.T @ x
    assert np.allclose(theta, -(np.diag(g) + 1.3))
    assert np.all(theta < 0)
    assert np.allclose(omega, -omega.T)


def test_psd_for_every_diagonal_rescaling():
    # I - Bt PSD implies D^-1 (I - Bt) D^-1 PSD for any positive D
    rng = np.random.default_rng(5)
    for n, p in ((20, 6), (4, 8), (6, 6), (2, 12)):   # includes n < p
        x = rng.standard_normal((n, p))
        est = fit_ridge(x, float(rng.uniform(0.01, 2.0)))
        assert est.min_eigenvalue >= -1e-9
        for _ in range(3):
            d = rng.uniform(0.2, 3.0, p)
            c = (np.eye(p) - est.btilde) / d[:, None] / d[None, :]
            assert np.linalg.eigvalsh(0.5 * (c + c.T))[0] >= -1e-9


def test_theorem_instantiation_through_lemma():
    rng = np.random.default_rng(6)
    for _ in range(20):
        n, p = int(rng.integers(2, 20)), int(rng.integers(3, 10))
        x = rng.standard_normal((n, p))
        lam2 = float(rng.uniform(0.05, 4.0))
        est = fit_ridge(x, lam2)
        theta, _, _ = kkt_residual(x, est)
        u = np.eye(p) - est.btilde
        v = x.T @ x + lam2 * np.eye(p)
        assert verify_psd_lemma(u, v, -2.0 * np.diag(theta))


def test_sign_propagation_lemma():
    rng = np.random.default_rng(7)
    # pick V SPD and W PSD, solve UV + VU = W: lemma must accept the U
    a = rng.standard_normal((5, 5))
    w = a @ a.T
    b = rng.standard_normal((5, 5))
    v = b @ b.T + 5 * np.eye(5)
    u = lyapunov_eig_solve(v, w)
    assert verify_psd_lemma(u, v, w)
    assert verify_psd_lemma(np.eye(5), v, 2 * v)
    with pytest.raises(ValueError):
        verify_psd_lemma(u, v, np.eye(5))       # identity violated
    with pytest.raises(ValueError):
        verify_psd_lemma(-np.eye(3), np.eye(3), -2 * np.eye(3))  # W not PSD


def test_penalty_trace_identity():
    # p + tr[Bt'Bt] = tr[(I-Bt)'(I-Bt)] for zero-diagonal Bt
    rng = np.random.default_rng(8)
    for _ in range(10):
        p = int(rng.integers(2, 9))
        b = rng.standard_normal((p, p))
        np.fill_diagonal(b, 0.0)
        lhs = p + np.trace(b.T @ b)
        ib = np.eye(p) - b
        assert abs(lhs - np.trace(ib.T @ ib)) < 1e-10


def test_rejects_nonpositive_penalty():
    x = np.random.default_rng(9).standard_normal((10, 3))
    with pytest.raises(ValueError):
        fit_ridge(x, 0.0)
