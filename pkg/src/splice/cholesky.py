"""l1-penalized Cholesky-factor baseline for covariance selection.

For a fixed variable ordering, regressing each variable on its predecessors
splits the penalized problem into p-1 uncoupled LASSO subproblems; the
subpaths are merged into one path over a common lambda axis, where the
subproblem-j axis is scaled by 1/d_j^2. The resulting precision estimate
U diag(1/d2) U' (U unit upper triangular holding the negated regression
coefficients) is PSD by construction but sensitive to the ordering.
"""

from dataclasses import dataclass, field

import numpy as np

from .homotopy import LassoPath, StoppingRule, WeightedLassoProblem, trace_path
from .linalg import SparseColumnMatrix, symmetric_eigenvalues


@dataclass
class CholeskyPath:
    ordering: np.ndarray                 # ordering[i] = original index of slot i
    d2: np.ndarray                       # residual scales, slot order
    subpaths: list = field(default_factory=list)   # subpath for slots 1..p-1
    merged_lambdas: np.ndarray | None = None

    @property
    def p(self):
        return len(self.ordering)

    @property
    def lambda_max(self):
        return float(self.merged_lambdas[0])

    def u_at(self, lam):
        """Unit-upper-triangular factor at merged-scale lambda (slot order)."""
        p = self.p
        u = np.eye(p)
        for j in range(1, p):
            path = self.subpaths[j - 1]
            lam_sub = lam * self.d2[j]
            if lam_sub >= path.lambda_max:
                continue
            coefs = path.interpolate(lam_sub)
            u[:j, j] = -coefs
        return u

    def support_at(self, lam):
        """Off-diagonal support as unordered pairs in original indexing."""
        u = self.u_at(lam)
        pairs = set()
        for k in range(self.p):
            for j in range(k + 1, self.p):
                if u[k, j] != 0.0:
                    a, b = self.ordering[k], self.ordering[j]
                    pairs.add((min(a, b), max(a, b)))
        return pairs


def inverted_ordering(p):
    """(p, p-1, ..., 1) in zero-based form: (p-1, ..., 0)."""
    return np.arange(p - 1, -1, -1)


def fit_cholesky_path(x, ordering=None, d2=None, stop=None):
    """Trace the p-1 predecessor-regression LASSO paths and merge them.

    d2 defaults to the marginal variances of the (ordered) columns; the
    merged lambda axis is the union of each subpath's breakpoints divided
    by the matching d_j^2.
    """
    x = np.asarray(x, dtype=float)
    n, p = x.shape
    if ordering is None:
        ordering = np.arange(p)
    ordering = np.asarray(ordering, dtype=int)
    xo = x[:, ordering]
    if d2 is None:
        d2 = np.einsum("ij,ij->j", xo, xo) / n
    d2 = np.asarray(d2, dtype=float)

    rows = np.arange(n)
    subpaths = []
    merged = set()
    for j in range(1, p):
        cols = [(rows, xo[:, k]) for k in range(j)]
        design = SparseColumnMatrix.from_columns(n, cols)
        path = trace_path(WeightedLassoProblem(design, xo[:, j], np.ones(j)), stop)
        subpaths.append(path)
        merged.update(bp.lam / d2[j] for bp in path.breakpoints)
    merged_lambdas = np.array(sorted(merged, reverse=True))
    return CholeskyPath(ordering, d2, subpaths, merged_lambdas)


def residual_d2_at(path, x, lam):
    """Residual variances of each subproblem at merged-scale lambda."""
    x = np.asarray(x, dtype=float)
    n, p = x.shape
    xo = x[:, path.ordering]
    u = path.u_at(lam)
    resid = xo @ u                      # column j: xo_j - sum_{k<j} coef_k xo_k
    return np.einsum("ij,ij->j", resid, resid) / n


def precision_from_cholesky(u, d2):
    """C = U diag(1/d2) U' for unit-upper-triangular U; PSD by construction."""
    u = np.asarray(u, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    if np.any(d2 <= 0.0):
        raise ValueError("d2 must be strictly positive")
    c = (u / d2[None, :]) @ u.T
    return 0.5 * (c + c.T)


def precision_in_original_order(path, lam, d2=None):
    """Precision estimate at lambda, permuted back to original indexing."""
    if d2 is None:
        d2 = path.d2
    u = path.u_at(lam)
    c_slot = precision_from_cholesky(u, d2)
    p = path.p
    c = np.empty((p, p))
    c[np.ix_(path.ordering, path.ordering)] = c_slot
    return c
