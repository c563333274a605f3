"""Accuracy metrics for precision-matrix estimates.

Loss functions compare a true precision C against an estimate Chat through
M = C Chat^-1 (quadratic and entropy losses are zero iff Chat = C), plus
plain spectral-norm error. Support-recovery quality is summarized by a
best-case ROC curve over the regularization path, and PSD behaviour by the
minimum-eigenvalue trajectory on a normalized lambda axis.
"""

from dataclasses import dataclass, field

import numpy as np

from .linalg import solve_spd


def _ratio_matrix(c_true, c_hat):
    c_true = np.asarray(c_true, dtype=float)
    c_hat = np.asarray(c_hat, dtype=float)
    return solve_spd(0.5 * (c_hat + c_hat.T), c_true.T).T   # C Chat^-1


def quadratic_loss(c_true, c_hat):
    """tr(C Chat^-1 - I)^2."""
    m = _ratio_matrix(c_true, c_hat)
    p = m.shape[0]
    d = m - np.eye(p)
    return float(np.trace(d @ d))


def entropy_loss(c_true, c_hat):
    """tr(C Chat^-1) - log det(C Chat^-1) - p."""
    m = _ratio_matrix(c_true, c_hat)
    p = m.shape[0]
    sign, logdet = np.linalg.slogdet(m)
    if sign <= 0:
        return float("inf")
    return float(np.trace(m)) - float(logdet) - p


def spectral_norm(m):
    """Largest singular value."""
    return float(np.linalg.norm(np.asarray(m, dtype=float), 2))


def spectral_norm_error(a, b):
    return spectral_norm(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))


def true_support(c_true, atol=1e-12):
    """Off-diagonal support of the true precision as a set of pairs (j < k)."""
    c_true = np.asarray(c_true, dtype=float)
    p = c_true.shape[0]
    return {(j, k) for j in range(p) for k in range(j + 1, p)
            if abs(c_true[j, k]) > atol}


@dataclass
class RocCurve:
    """Best-case support-recovery operating curve.

    For each achievable true-positive count t, false_positives[t] is the
    smallest (replication-averaged) number of false positives any point on
    the path attains while detecting exactly t true edges. Counts of
    replications contributing no path point with a given t are recorded in
    exclusions (the average runs over the contributing replications only).
    """
    true_positive_counts: np.ndarray
    false_positives: np.ndarray
    exclusions: np.ndarray
    n_replications: int

    @property
    def max_true_positives(self):
        return int(self.true_positive_counts[-1])


def _min_fp_per_tp(support_sets, truth, n_edges_true):
    """Per replication: minimum false positives at each true-positive count."""
    best = np.full(n_edges_true + 1, np.inf)
    for s in support_sets:
        s = set(s)
        tp = len(s & truth)
        fp = len(s) - tp
        if fp < best[tp]:
            best[tp] = fp
    return best


def roc_curve(support_sets_per_rep, truth):
    """Aggregate best-case ROC across replications.

    support_sets_per_rep: one iterable of support sets (pair collections)
    per replication, typically the distinct supports visited by a path.
    """
    truth = set(truth)
    n_true = len(truth)
    reps = [_min_fp_per_tp(sets, truth, n_true) for sets in support_sets_per_rep]
    reps = np.array(reps)
    counts = np.sum(np.isfinite(reps), axis=0)
    exclusions = len(reps) - counts
    with np.errstate(invalid="ignore"):
        avg = np.where(counts > 0,
                       np.nansum(np.where(np.isfinite(reps), reps, 0.0), axis=0)
                       / np.maximum(counts, 1),
                       np.nan)
    return RocCurve(np.arange(n_true + 1), avg, exclusions, len(reps))


@dataclass
class EigenPathRecord:
    lambda_rel: float        # lambda / lambda_max
    min_eigenvalue: float


def min_eigenvalue_path(lambdas, matrices, lambda_max=None):
    """Minimum eigenvalue of each matrix over the normalized lambda axis."""
    if lambda_max is None:
        lambda_max = max(lambdas)
    out = []
    for lam, m in zip(lambdas, matrices):
        eig = float(np.linalg.eigvalsh(0.5 * (m + m.T))[0])
        out.append(EigenPathRecord(float(lam) / lambda_max, eig))
    return out
