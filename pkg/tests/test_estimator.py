import numpy as np
import pytest

from oracles import cd_lasso
from splice.estimator import (InconsistentParamsError, RegressionParams,
                              b_from_btilde, btilde_matrix,
                              build_symmetric_design, d2_update,
                              fit_splice_path, pair_list, params_from_covariance,
                              partition_parameters, precision_from_params,
                              pseudo_neg_loglik)
from splice.homotopy import StoppingRule, WeightedLassoProblem, trace_path
from splice.linalg import DegenerateDesignError
from splice import simgen


def test_partition_parameters_2x2():
    beta, d2 = partition_parameters(np.array([[1.0, 0.5], [0.5, 1.0]]), 0)
    assert np.allclose(beta, [0.5])
    assert np.isclose(d2, 0.75)


def test_precision_reconstruction_2x2():
    params = RegressionParams(np.array([[0.0, 0.5], [0.5, 0.0]]),
                              np.array([0.75, 0.75]))
    est = precision_from_params(params)
    assert np.allclose(est.matrix, [[4 / 3, -2 / 3], [-2 / 3, 4 / 3]])


def test_params_roundtrip_random_spd():
    rng = np.random.default_rng(0)
    for p in (3, 6, 10):
        a = rng.standard_normal((p, p))
        sigma = a @ a.T + p * np.eye(p)
        params = params_from_covariance(sigma)
        est = precision_from_params(params)
        assert np.allclose(est.matrix, np.linalg.inv(sigma), atol=1e-10)


def test_validate_rejects_asymmetric_pair():
    b = np.array([[0.0, 0.5], [0.1, 0.0]])
    with pytest.raises(InconsistentParamsError):
        RegressionParams(b, np.array([1.0, 1.0])).validate()


def test_validate_rejects_nonzero_diagonal():
    b = np.array([[0.1, 0.0], [0.0, 0.0]])
    with pytest.raises(InconsistentParamsError):
        RegressionParams(b, np.array([1.0, 1.0])).validate()


def test_design_shape_and_layout():
    rng = np.random.default_rng(1)
    n, p = 7, 4
    x = rng.standard_normal((n, p))
    d2 = np.einsum("ij,ij->j", x, x) / n
    design = build_symmetric_design(x, d2)
    q = p * (p - 1) // 2
    assert design.z.n_rows == n * p
    assert design.z.n_cols == q
    assert len(design.pairs) == q
    # each column holds exactly 2n nonzeros
    assert np.all(np.diff(design.z.indptr) == 2 * n)
    # dense check of the block scatter: column {j,k} has Xt_k in block j
    # and Xt_j in block k
    xt = x / np.sqrt(d2)[None, :]
    dense = design.z.toarray()
    for i, (j, k) in enumerate(design.pairs):
        col = np.zeros(n * p)
        col[j * n:(j + 1) * n] = xt[:, k]
        col[k * n:(k + 1) * n] = xt[:, j]
        assert np.allclose(dense[:, i], col)
    assert np.allclose(design.y, xt.T.ravel())


def test_design_weights_collect_both_ordered_terms():
    d2 = np.array([1.0, 4.0, 9.0])
    x = np.random.default_rng(2).standard_normal((6, 3))
    design = build_symmetric_design(x, d2)
    d = np.sqrt(d2)
    for i, (j, k) in enumerate(design.pairs):
        assert np.isclose(design.weights[i], d[j] / d[k] + d[k] / d[j])
    # equal scales: both ordered entries penalized with unit weight
    design_eq = build_symmetric_design(x, np.ones(3))
    assert np.allclose(design_eq.weights, 2.0)


def test_penalty_identity_under_renormalization():
    # sum over ordered pairs of |b_jk| equals the weighted merged penalty
    rng = np.random.default_rng(3)
    p = 5
    d2 = rng.uniform(0.5, 3.0, p)
    d = np.sqrt(d2)
    pairs = pair_list(p)
    coefs = rng.standard_normal(len(pairs))
    b = b_from_btilde(coefs, pairs, d)
    ordered_l1 = np.sum(np.abs(b))
    w = np.array([d[j] / d[k] + d[k] / d[j] for j, k in pairs])
    assert np.isclose(ordered_l1, np.sum(w * np.abs(coefs)))


def test_merged_path_matches_coordinate_descent():
    rng = np.random.default_rng(4)
    n, p = 40, 4
    x = rng.standard_normal((n, p))
    d2 = np.einsum("ij,ij->j", x, x) / n
    design = build_symmetric_design(x, d2)
    path = trace_path(WeightedLassoProblem(design.z, design.y, design.weights))
    dense = design.z.toarray()
    for lam in np.geomspace(path.lambda_max * 0.8, path.lambda_max * 1e-2, 6):
        b_cd = cd_lasso(dense, design.y, design.weights, lam)
        assert np.max(np.abs(path.interpolate(lam) - b_cd)) < 1e-6


def test_psd_iff_btilde_spectrum_below_one():
    # D^-1 (I - Bt) D^-1 is PSD exactly when max eig of Bt is <= 1
    rng = np.random.default_rng(5)
    p = 6
    for _ in range(20):
        bt = rng.standard_normal((p, p)) * 0.4
        bt = 0.5 * (bt + bt.T)
        np.fill_diagonal(bt, 0.0)
        d = rng.uniform(0.5, 2.0, p)
        c = (np.eye(p) - bt) / d[:, None] / d[None, :]
        psd = np.linalg.eigvalsh(c)[0] >= -1e-12
        assert psd == (np.linalg.eigvalsh(bt)[-1] <= 1 + 1e-12)


def test_d2_update_matches_direct_residuals():
    rng = np.random.default_rng(6)
    n, p = 30, 4
    x = rng.standard_normal((n, p))
    b = rng.standard_normal((p, p)) * 0.2
    np.fill_diagonal(b, 0.0)
    d2, clamped = d2_update(x, b)
    for j in range(p):
        r = x[:, j] - x @ b[j]
        assert np.isclose(d2[j], np.dot(r, r) / n)
    assert clamped == []


def test_d2_update_degenerate_raises_or_clamps():
    x = np.array([[1.0, 1.0], [2.0, 2.0], [-1.0, -1.0]])
    b = np.array([[0.0, 1.0], [1.0, 0.0]])   # perfect fit: zero residuals
    with pytest.raises(DegenerateDesignError):
        d2_update(x, b)
    d2, clamped = d2_update(x, b, floor_scale=1e-12)
    assert clamped == [0, 1]
    assert np.all(d2 > 0)


def test_fit_recovers_dense_2var_precision():
    rng = np.random.default_rng(7)
    c_true = np.array([[4 / 3, -2 / 3], [-2 / 3, 4 / 3]])
    x = simgen.gaussian_sample(c_true, 5000, rng)
    fit = fit_splice_path(x, criterion="AIC")
    est = precision_from_params(fit.final_params)
    assert fit.converged
    assert np.max(np.abs(est.matrix - c_true)) < 0.1


def test_fit_diagonal_truth_selects_empty_model():
    rng = np.random.default_rng(8)
    x = simgen.gaussian_sample(np.eye(4), 400, rng)
    fit = fit_splice_path(x, criterion="BIC")
    assert np.count_nonzero(fit.final_params.b) == 0


def test_fit_breakpoint_params_satisfy_symmetry():
    rng = np.random.default_rng(9)
    c = simgen.ar_precision(5)
    x = simgen.gaussian_sample(c, 200, rng)
    fit = fit_splice_path(x)
    d = np.sqrt(fit.final_params.d2)
    for bp in fit.btilde_path.breakpoints:
        b = b_from_btilde(bp.coefficients, fit.pairs, d)
        RegressionParams(b, fit.final_params.d2).validate()


def test_fit_lambda_frozen_after_warmup():
    rng = np.random.default_rng(10)
    c = simgen.ar_precision(4)
    x = simgen.gaussian_sample(c, 150, rng)
    fit = fit_splice_path(x, warmup_m=2, tol=1e-8, max_iter_q=10)
    lams = [lam for _, _, lam in fit.iterations]
    assert all(l == lams[1] for l in lams[1:])


def test_pseudo_likelihood_formula():
    rng = np.random.default_rng(11)
    x = rng.standard_normal((20, 3))
    params = params_from_covariance(x.T @ x / 20 + 0.5 * np.eye(3))
    val = pseudo_neg_loglik(x, params)
    # direct per-variable conditional Gaussian sum
    direct = 0.0
    for j in range(3):
        r = x[:, j] - x @ params.b[j]
        direct += (0.5 * 20 * np.log(2 * np.pi * params.d2[j])
                   + 0.5 * np.dot(r, r) / params.d2[j])
    assert np.isclose(val, direct)
