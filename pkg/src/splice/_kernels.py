"""Hot numeric kernels with numba acceleration.

Set SPLICE_NUMBA=0 to force the pure-numpy fallbacks (useful for debugging
and as a reference implementation; see benchmarks/bench_kernels.py for a
speed comparison). The backend is chosen once at import time.
"""

import os

import numpy as np

_env = os.environ.get("SPLICE_NUMBA", "1").strip().lower()
USE_NUMBA = _env not in ("0", "false", "no", "off")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

BACKEND = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy reference implementations
# ---------------------------------------------------------------------------

def _csc_matvec_np(indptr, indices, data, b, n_rows):
    y = np.zeros(n_rows)
    for j in range(len(indptr) - 1):
        bj = b[j]
        if bj != 0.0:
            lo, hi = indptr[j], indptr[j + 1]
            y[indices[lo:hi]] += bj * data[lo:hi]
    return y


def _csc_rmatvec_np(indptr, indices, data, r):
    n_cols = len(indptr) - 1
    c = np.empty(n_cols)
    for j in range(n_cols):
        lo, hi = indptr[j], indptr[j + 1]
        c[j] = np.dot(data[lo:hi], r[indices[lo:hi]])
    return c


def _csc_subset_matvec_np(indptr, indices, data, cols, coefs, n_rows):
    y = np.zeros(n_rows)
    for i in range(len(cols)):
        j = cols[i]
        lo, hi = indptr[j], indptr[j + 1]
        y[indices[lo:hi]] += coefs[i] * data[lo:hi]
    return y


def _csc_dot_pairs_np(indptr, indices, data, j, cols):
    # Sparse-sparse dots; row indices within each column are sorted.
    out = np.empty(len(cols))
    lo_j, hi_j = indptr[j], indptr[j + 1]
    idx_j = indices[lo_j:hi_j]
    val_j = data[lo_j:hi_j]
    for i in range(len(cols)):
        k = cols[i]
        lo_k, hi_k = indptr[k], indptr[k + 1]
        idx_k = indices[lo_k:hi_k]
        common, ia, ib = np.intersect1d(idx_j, idx_k, assume_unique=True,
                                        return_indices=True)
        out[i] = np.dot(val_j[ia], data[lo_k:hi_k][ib]) if len(common) else 0.0
    return out


def _chol_factor_np(a, eps):
    # Lower Cholesky with pivot check: fails when a pivot drops below
    # eps * max(diag). Returns (L, info); info = 1-based failing pivot, 0 on success.
    p = a.shape[0]
    L = np.array(a, dtype=np.float64, copy=True)
    thresh = eps * max(np.max(np.diag(a)), 0.0)
    for k in range(p):
        piv = L[k, k]
        if piv <= thresh:
            return L, k + 1
        piv = np.sqrt(piv)
        L[k, k] = piv
        if k + 1 < p:
            L[k + 1:, k] /= piv
            L[k + 1:, k + 1:] -= np.outer(L[k + 1:, k], L[k + 1:, k])
    return np.tril(L), 0


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if USE_NUMBA:

    @njit(cache=True)
    def _csc_matvec_nb(indptr, indices, data, b, n_rows):
        y = np.zeros(n_rows)
        for j in range(len(indptr) - 1):
            bj = b[j]
            if bj != 0.0:
                for t in range(indptr[j], indptr[j + 1]):
                    y[indices[t]] += bj * data[t]
        return y

    @njit(cache=True)
    def _csc_rmatvec_nb(indptr, indices, data, r):
        n_cols = len(indptr) - 1
        c = np.empty(n_cols)
        for j in range(n_cols):
            acc = 0.0
            for t in range(indptr[j], indptr[j + 1]):
                acc += data[t] * r[indices[t]]
            c[j] = acc
        return c

    @njit(cache=True)
    def _csc_subset_matvec_nb(indptr, indices, data, cols, coefs, n_rows):
        y = np.zeros(n_rows)
        for i in range(len(cols)):
            j = cols[i]
            for t in range(indptr[j], indptr[j + 1]):
                y[indices[t]] += coefs[i] * data[t]
        return y

    @njit(cache=True)
    def _csc_dot_pairs_nb(indptr, indices, data, j, cols):
        out = np.empty(len(cols))
        lo_j, hi_j = indptr[j], indptr[j + 1]
        for i in range(len(cols)):
            k = cols[i]
            a, b = lo_j, indptr[k]
            hi_k = indptr[k + 1]
            acc = 0.0
            while a < hi_j and b < hi_k:
                ra, rb = indices[a], indices[b]
                if ra == rb:
                    acc += data[a] * data[b]
                    a += 1
                    b += 1
                elif ra < rb:
                    a += 1
                else:
                    b += 1
            out[i] = acc
        return out

    @njit(cache=True)
    def _chol_factor_nb(a, eps):
        p = a.shape[0]
        L = a.copy()
        mx = 0.0
        for k in range(p):
            if a[k, k] > mx:
                mx = a[k, k]
        thresh = eps * mx
        for k in range(p):
            piv = L[k, k]
            if piv <= thresh:
                return L, k + 1
            piv = np.sqrt(piv)
            L[k, k] = piv
            for i in range(k + 1, p):
                L[i, k] /= piv
            for jj in range(k + 1, p):
                ljk = L[jj, k]
                for i in range(jj, p):
                    L[i, jj] -= L[i, k] * ljk
        for k in range(p):
            for jj in range(k + 1, p):
                L[k, jj] = 0.0
        return L, 0

    csc_matvec = _csc_matvec_nb
    csc_rmatvec = _csc_rmatvec_nb
    csc_subset_matvec = _csc_subset_matvec_nb
    csc_dot_pairs = _csc_dot_pairs_nb
    chol_factor = _chol_factor_nb
else:
    csc_matvec = _csc_matvec_np
    csc_rmatvec = _csc_rmatvec_np
    csc_subset_matvec = _csc_subset_matvec_np
    csc_dot_pairs = _csc_dot_pairs_np
    chol_factor = _chol_factor_np
