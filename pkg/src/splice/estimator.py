"""Sparse pseudo-likelihood precision-matrix estimation (SPLICE).

The precision matrix is parametrized as C = D^-2 (I - B) where row j of B
holds the coefficients of the regression of variable j on the others and
d_j^2 the residual variance. Symmetry of C imposes d2_k b_jk = d2_j b_kj;
the constraint is enforced structurally by tracing the path in the
renormalized coordinates Bt = D^-1 B D (symmetric) over a merged design in
which the column for pair {j,k} carries both regressions at once.

The fitting loop alternates: trace the full l1 path of Bt for fixed D,
recompute residual variances along the path, pick lambda by an information
criterion, repeat until the variances stabilize.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import selection
from .homotopy import LassoPath, StoppingRule, WeightedLassoProblem, trace_path
from .linalg import DegenerateDesignError, SparseColumnMatrix

SYMMETRY_CONSTRAINT_RTOL = 1e-9
D2_FLOOR_FACTOR = 1e-12


class InconsistentParamsError(ValueError):
    """(B, d2) violate the precision-symmetry constraint beyond tolerance."""


@dataclass
class RegressionParams:
    """Off-diagonal regression coefficients B (zero diagonal) and residual
    variances d2 (so D = diag(sqrt(d2)))."""
    b: np.ndarray
    d2: np.ndarray

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        self.d2 = np.asarray(self.d2, dtype=float)

    @property
    def p(self):
        return len(self.d2)

    def validate(self):
        if np.any(np.diag(self.b) != 0.0):
            raise InconsistentParamsError("B must have a zero diagonal")
        if np.any(self.d2 <= 0.0) or not np.all(np.isfinite(self.d2)):
            raise InconsistentParamsError("d2 must be strictly positive and finite")
        lhs = self.d2[None, :] * self.b          # d2_k * b_jk
        rhs = self.d2[:, None] * self.b.T        # d2_j * b_kj
        scale = max(np.max(np.abs(lhs)), 1e-300)
        if np.max(np.abs(lhs - rhs)) > SYMMETRY_CONSTRAINT_RTOL * max(scale, 1.0):
            raise InconsistentParamsError("symmetry constraint d2_k b_jk = d2_j b_kj violated")
        return self


@dataclass
class PrecisionEstimate:
    matrix: np.ndarray
    method: str = "splice"
    lam: float | None = None
    iterations: int | None = None


@dataclass
class SymmetricDesign:
    """Merged regression design: y stacks the normalized columns, and the
    design column for pair {j,k} scatters Xt_k into block j and Xt_j into
    block k, so a single coefficient serves both b~_jk and b~_kj."""
    y: np.ndarray
    z: SparseColumnMatrix
    pairs: list
    pair_index: dict
    weights: np.ndarray
    d2: np.ndarray


@dataclass
class SplicePathResult:
    iterations: list = field(default_factory=list)  # (iteration, d2, lambda_selected)
    final_params: RegressionParams | None = None
    btilde_path: LassoPath | None = None
    pairs: list = field(default_factory=list)
    selection_record: selection.SelectionRecord | None = None
    converged: bool = False
    iterations_used: int = 0
    warnings: list = field(default_factory=list)

    @property
    def lambda_selected(self):
        return self.iterations[-1][2] if self.iterations else None


def pair_list(p):
    return [(j, k) for j in range(p) for k in range(j + 1, p)]


def partition_parameters(sigma, j):
    """Regression view of one row of an SPD covariance: coefficients of
    variable j on the rest and the conditional (residual) variance."""
    from .linalg import solve_spd

    sigma = np.asarray(sigma, dtype=float)
    p = sigma.shape[0]
    rest = [i for i in range(p) if i != j]
    s_rr = sigma[np.ix_(rest, rest)]
    s_rj = sigma[rest, j]
    beta = solve_spd(s_rr, s_rj)
    d2 = float(sigma[j, j] - np.dot(s_rj, beta))
    return beta, d2


def params_from_covariance(sigma):
    """Assemble (B, d2) for all rows of an SPD covariance matrix."""
    sigma = np.asarray(sigma, dtype=float)
    p = sigma.shape[0]
    b = np.zeros((p, p))
    d2 = np.zeros(p)
    for j in range(p):
        beta, d2_j = partition_parameters(sigma, j)
        rest = [i for i in range(p) if i != j]
        b[j, rest] = beta
        d2[j] = d2_j
    return RegressionParams(b, d2)


def precision_from_params(params, method="splice", lam=None, iterations=None):
    """C = D^-2 (I - B), symmetrized; raises if (B, d2) are inconsistent."""
    params.validate()
    p = params.p
    c = (np.eye(p) - params.b) / params.d2[:, None]
    asym = np.max(np.abs(c - c.T))
    if asym > 1e-8 * max(np.max(np.abs(c)), 1.0):
        raise InconsistentParamsError("reconstructed precision asymmetric beyond tolerance")
    return PrecisionEstimate(0.5 * (c + c.T), method, lam, iterations)


def build_symmetric_design(x, d2):
    """Merged design (y, Z, weights) for the symmetry-constrained l1 problem.

    The weight of the merged column {j,k} collects the penalty on both
    ordered entries: d_j/d_k + d_k/d_j (base weights fixed at 1).
    """
    x = np.asarray(x, dtype=float)
    n, p = x.shape
    if n < 2 or p < 2:
        raise ValueError("need at least 2 samples and 2 variables")
    d2 = np.asarray(d2, dtype=float)
    if np.any(d2 <= 0.0):
        raise ValueError("d2 must be strictly positive")
    d = np.sqrt(d2)
    xt = x / d[None, :]
    y = xt.T.ravel()
    pairs = pair_list(p)
    rows = np.arange(n)
    columns = []
    for j, k in pairs:
        idx = np.concatenate([rows + j * n, rows + k * n])
        val = np.concatenate([xt[:, k], xt[:, j]])
        columns.append((idx, val))
    z = SparseColumnMatrix.from_columns(n * p, columns)
    weights = np.array([d[j] / d[k] + d[k] / d[j] for j, k in pairs])
    pair_index = {pair: i for i, pair in enumerate(pairs)}
    return SymmetricDesign(y, z, pairs, pair_index, weights, d2.copy())


def btilde_matrix(coefs, pairs, p):
    bt = np.zeros((p, p))
    for i, (j, k) in enumerate(pairs):
        bt[j, k] = bt[k, j] = coefs[i]
    return bt


def b_from_btilde(coefs, pairs, d):
    """Map merged-path coefficients back to B: b_jk = (d_j/d_k) b~_jk."""
    p = len(d)
    b = np.zeros((p, p))
    for i, (j, k) in enumerate(pairs):
        b[j, k] = coefs[i] * d[j] / d[k]
        b[k, j] = coefs[i] * d[k] / d[j]
    return b


def d2_update(x, b, floor_scale=None):
    """Residual variances d2_j = ||X_j - sum_k X_k b_jk||^2 / n.

    With floor_scale set, degenerate residuals are clamped at
    floor_scale * ||X_j||^2/n and reported; otherwise they raise.
    Returns (d2, clamped_indices).
    """
    x = np.asarray(x, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(np.diag(b) != 0.0):
        raise ValueError("B must have a zero diagonal")
    n = x.shape[0]
    resid = x - x @ b.T
    d2 = np.einsum("ij,ij->j", resid, resid) / n
    marg = np.einsum("ij,ij->j", x, x) / n
    floor = D2_FLOOR_FACTOR * marg
    degenerate = np.flatnonzero(d2 <= floor)
    if len(degenerate):
        if floor_scale is None:
            raise DegenerateDesignError(
                f"zero residual variance for columns {degenerate.tolist()}")
        d2 = np.maximum(d2, floor_scale * marg)
    return d2, degenerate.tolist()


def pseudo_neg_loglik(x, params):
    """Pseudo (conditional-product) Gaussian negative log-likelihood."""
    x = np.asarray(x, dtype=float)
    n, p = x.shape
    resid = x - x @ params.b.T
    rss = np.einsum("ij,ij->j", resid, resid)
    return (0.5 * n * p * math.log(2 * math.pi)
            + 0.5 * n * float(np.sum(np.log(params.d2)))
            + 0.5 * float(np.sum(rss / params.d2)))


def fit_splice_path(x, criterion="AIC", warmup_m=6, max_iter_q=100, tol=1e-2,
                    stop=None, center=True, standard_aicc=False):
    """Alternating path-tracing fit of the sparse pseudo-likelihood estimate.

    Each round traces the full Bt path for the current D, maps every
    breakpoint back to (B, d2) candidates, scores them with the chosen
    criterion, and updates D at the selected lambda. After warmup_m rounds
    lambda is frozen and only the B/D alternation continues. Stops when
    max_j |log(d2'_j / d2_j)| / 2 < tol or after max_iter_q rounds.
    """
    x = np.asarray(x, dtype=float)
    n, p = x.shape
    if center:
        x = x - x.mean(axis=0, keepdims=True)
    marg = np.einsum("ij,ij->j", x, x) / n
    if np.any(marg == 0.0):
        raise DegenerateDesignError("constant (zero-variance) column in data")

    result = SplicePathResult()
    d2 = marg.copy()
    lam_frozen = None
    stop = stop or StoppingRule()

    for it in range(1, max_iter_q + 1):
        design = build_symmetric_design(x, d2)
        path = trace_path(WeightedLassoProblem(design.z, design.y, design.weights), stop)
        d = np.sqrt(d2)

        def params_at(coefs):
            # Residual variances are computed from B mapped with the current
            # d; B is then re-expressed against the refreshed variances so
            # that (B, d2) stay exactly symmetry-consistent (the estimate is
            # D^-1 (I - Bt) D^-1 at the final D either way).
            b = b_from_btilde(coefs, design.pairs, d)
            d2_new, clamped = d2_update(x, b, floor_scale=D2_FLOOR_FACTOR)
            if clamped:
                result.warnings.append(
                    f"iteration {it}: residual variance clamped for columns {clamped}")
            return RegressionParams(b_from_btilde(coefs, design.pairs, np.sqrt(d2_new)),
                                    d2_new)

        if it <= warmup_m:
            records = [(bp.lam, params_at(bp.coefficients)) for bp in path.breakpoints]
            sel = selection.select_lambda(records, x, criterion, n,
                                          standard_aicc=standard_aicc)
            lam_k = sel.lam
            chosen = records[sel.index][1]
            result.selection_record = sel
            lam_frozen = lam_k
        else:
            lam_k = lam_frozen
            last_lam = path.breakpoints[-1].lam
            if lam_k < last_lam and path.termination_reason != "lambda_zero":
                result.warnings.append(
                    f"iteration {it}: frozen lambda {lam_k:.6g} below traced "
                    f"path end {last_lam:.6g}; clamped")
                lam_k_eval = last_lam
            else:
                lam_k_eval = lam_k
            chosen = params_at(path.interpolate(lam_k_eval))

        result.iterations.append((it, d2.copy(), lam_k))
        result.btilde_path = path
        result.pairs = design.pairs
        result.final_params = chosen
        result.iterations_used = it

        delta = 0.5 * np.max(np.abs(np.log(chosen.d2 / d2)))
        d2 = chosen.d2
        if delta < tol:
            result.converged = True
            break

    return result
