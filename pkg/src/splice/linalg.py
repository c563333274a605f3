"""Dense symmetric linear algebra and a sparse column-major design matrix.

Everything operates on plain numpy arrays. Matrices handled here stay small
(p up to a couple hundred), so the SPD routines use an explicit Cholesky
factorization with a pivot threshold instead of deferring to LAPACK's
error reporting: near-singular designs must be detected, not guessed at.
"""

import numpy as np
import scipy.linalg

from . import _kernels

SYMMETRY_RTOL = 1e-10
SPD_PIVOT_EPS = 1e-12


class AsymmetricMatrixError(ValueError):
    """Input expected to be symmetric is not, beyond tolerance."""


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Cholesky pivot fell below threshold; matrix is not (numerically) SPD."""


class DegenerateDesignError(ValueError):
    """Design contains an unusable (all-zero or collinear-to-zero) column."""


def check_symmetric(m, rtol=SYMMETRY_RTOL):
    """Validate symmetry within relative tolerance and return (M + M')/2."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise AsymmetricMatrixError(f"expected square matrix, got shape {m.shape}")
    scale = max(np.max(np.abs(m)), 1.0)
    if np.max(np.abs(m - m.T)) > rtol * scale:
        raise AsymmetricMatrixError("matrix is not symmetric within tolerance")
    return 0.5 * (m + m.T)


def symmetric_eigenvalues(m):
    """Ascending eigenvalues of a symmetric matrix (deterministic LAPACK path)."""
    m = check_symmetric(m)
    return np.linalg.eigvalsh(m)


def cholesky_spd(a):
    """Lower Cholesky factor of an SPD matrix with explicit pivot check."""
    a = check_symmetric(a)
    L, info = _kernels.chol_factor(np.ascontiguousarray(a), SPD_PIVOT_EPS)
    if info:
        raise NotPositiveDefiniteError(f"pivot {info - 1} below threshold; matrix not SPD")
    return L

def solve_spd(a, b):
    """Solve a x = b for SPD a via Cholesky."""
    L = cholesky_spd(a)
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != L.shape[0]:
        raise ValueError(f"rhs has {b.shape[0]} rows, expected {L.shape[0]}")
    y = scipy.linalg.solve_triangular(L, b, lower=True)
    return scipy.linalg.solve_triangular(L.T, y, lower=False)


def log_det_spd(a):
    """log det of an SPD matrix via its Cholesky factor."""
    L = cholesky_spd(a)
    return 2.0 * float(np.sum(np.log(np.diag(L))))


class SparseColumnMatrix:
    """Column-oriented sparse matrix (CSC layout over flat numpy arrays).

    Row indices within each column are strictly increasing and stored values
    are nonzero. The matvec/rmatvec/gram primitives dispatch to the kernel
    backend selected in `_kernels`.
    """

    def __init__(self, n_rows, n_cols, indptr, indices, data):
        self.n_rows = int(n_rows)
        self.n_cols = int(n_cols)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.data = np.asarray(data, dtype=np.float64)
        if len(self.indptr) != self.n_cols + 1:
            raise ValueError("indptr length must be n_cols + 1")

    @classmethod
    def from_columns(cls, n_rows, columns):
        """Build from a list of (row_indices, values) pairs, one per column."""
        indptr = [0]
        idx_parts = []
        val_parts = []
        for rows, vals in columns:
            rows = np.asarray(rows, dtype=np.int64)
            vals = np.asarray(vals, dtype=np.float64)
            keep = vals != 0.0
            rows, vals = rows[keep], vals[keep]
            order = np.argsort(rows)
            rows, vals = rows[order], vals[order]
            if len(rows) and (np.any(np.diff(rows) <= 0) or rows[-1] >= n_rows):
                raise ValueError("row indices must be strictly increasing and < n_rows")
            idx_parts.append(rows)
            val_parts.append(vals)
            indptr.append(indptr[-1] + len(rows))
        indices = np.concatenate(idx_parts) if idx_parts else np.empty(0, dtype=np.int64)
        data = np.concatenate(val_parts) if val_parts else np.empty(0)
        return cls(n_rows, len(indptr) - 1, indptr, indices, data)

    @property
    def nnz(self):
        return len(self.data)

    def matvec(self, b):
        b = np.asarray(b, dtype=np.float64)
        return _kernels.csc_matvec(self.indptr, self.indices, self.data, b, self.n_rows)

    def rmatvec(self, r):
        r = np.asarray(r, dtype=np.float64)
        return _kernels.csc_rmatvec(self.indptr, self.indices, self.data, r)

    def subset_matvec(self, cols, coefs):
        cols = np.asarray(cols, dtype=np.int64)
        coefs = np.asarray(coefs, dtype=np.float64)
        return _kernels.csc_subset_matvec(self.indptr, self.indices, self.data,
                                          cols, coefs, self.n_rows)

    def column_dots(self, j, cols):
        """Dot products of column j with each column in `cols`."""
        cols = np.asarray(cols, dtype=np.int64)
        return _kernels.csc_dot_pairs(self.indptr, self.indices, self.data, j, cols)

    def column_norms_sq(self):
        out = np.empty(self.n_cols)
        for j in range(self.n_cols):
            lo, hi = self.indptr[j], self.indptr[j + 1]
            out[j] = np.dot(self.data[lo:hi], self.data[lo:hi])
        return out

    def gram(self):
        """Dense Z'Z (used by the ridge solver; n_cols stays at p(p-1)/2)."""
        g = np.empty((self.n_cols, self.n_cols))
        all_cols = np.arange(self.n_cols, dtype=np.int64)
        for j in range(self.n_cols):
            g[j, :] = self.column_dots(j, all_cols)
        return 0.5 * (g + g.T)

    def toarray(self):
        out = np.zeros((self.n_rows, self.n_cols))
        for j in range(self.n_cols):
            lo, hi = self.indptr[j], self.indptr[j + 1]
            out[self.indices[lo:hi], j] = self.data[lo:hi]
        return out
