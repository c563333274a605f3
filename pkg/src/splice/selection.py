"""Exact Gaussian likelihood evaluation and information-criterion selection.

The selection rules score each candidate regularization level with the exact
Gaussian negative log-likelihood (not the pseudo-likelihood surrogate) plus
an AIC / AICc / BIC penalty on an unbiased degrees-of-freedom estimate:
p mean parameters plus the off-diagonal support size.
"""

import math
from dataclasses import dataclass

import numpy as np

CRITERIA = ("AIC", "AICc", "BIC")


class NoValidModelError(ValueError):
    """Every candidate was outside the Gaussian parameter space."""


@dataclass
class SelectionRecord:
    lam: float
    df: int
    exact_nll: float
    criterion_value: float
    criterion: str
    valid: bool = True
    index: int = -1


def exact_neg_loglik(x, params):
    """Exact Gaussian negative log-likelihood at (B, D) parameters.

    Evaluated in the renormalized form: with Bt = D^-1 B D and Xt = X D^-1,
    -L = (np/2) log 2pi - (n/2) log det(I - Bt) + (n/2) sum_j log d2_j
         + (1/2) tr[Xt (I - Bt) Xt'].
    Returns +inf when I - Bt is not positive definite (the candidate lies
    outside the parameter space and must never be selected).
    """
    x = np.asarray(x, dtype=float)
    n, p = x.shape
    d = np.sqrt(params.d2)
    bt = (params.b / d[:, None]) * d[None, :]
    bt = 0.5 * (bt + bt.T)
    eig = np.linalg.eigvalsh(np.eye(p) - bt)
    if eig[0] <= 1e-12:
        return math.inf
    xt = x / d[None, :]
    gt = xt.T @ xt
    trace_term = np.trace(gt) - float(np.sum(bt * gt))
    return (0.5 * n * p * math.log(2 * math.pi)
            - 0.5 * n * float(np.sum(np.log(eig)))
            + 0.5 * n * float(np.sum(np.log(params.d2)))
            + 0.5 * trace_term)


def gaussian_nll_precision(x, c):
    """Exact Gaussian negative log-likelihood for a given precision matrix."""
    x = np.asarray(x, dtype=float)
    n, p = x.shape
    eig = np.linalg.eigvalsh(0.5 * (c + c.T))
    if eig[0] <= 1e-12:
        return math.inf
    return (0.5 * n * p * math.log(2 * math.pi)
            - 0.5 * n * float(np.sum(np.log(eig)))
            + 0.5 * float(np.sum((x @ c) * x)))


def degrees_of_freedom(b, p=None):
    """p (mean parameters) plus the exact-nonzero upper-triangular support of B."""
    b = np.asarray(b)
    if p is None:
        p = b.shape[0]
    iu = np.triu_indices(p, k=1)
    return int(p + np.count_nonzero(b[iu]))


def criterion_penalty(criterion, n, df, standard_aicc=False):
    """Penalty K(n, df) added to the exact nll; returns (value, valid)."""
    if criterion == "AIC":
        return 2.0 * df, True
    if criterion == "BIC":
        return math.log(n) * df, True
    if criterion == "AICc":
        if standard_aicc:
            if n - df - 1 <= 0:
                return math.inf, False
            return 2.0 * df + 2.0 * df * (df + 1) / (n - df - 1), True
        # Small-sample corrected penalty as used with smoothing-style df;
        # undefined (negative/singular) once df + 2 >= n.
        if df + 2 >= n:
            return math.inf, False
        return (1.0 + df / n) / (1.0 - (df + 2.0) / n), True
    raise ValueError(f"unknown criterion {criterion!r}")


def select_lambda(records, x, criterion, n, standard_aicc=False):
    """Pick the criterion-minimizing (lambda, params) record.

    Ties break toward larger lambda (the sparser model). Records whose
    exact likelihood or penalty is undefined are marked invalid and skipped.
    """
    if not records:
        raise NoValidModelError("no candidate records")
    evaluated = []
    for idx, (lam, params) in enumerate(records):
        nll = exact_neg_loglik(x, params)
        df = degrees_of_freedom(params.b)
        pen, pen_ok = criterion_penalty(criterion, n, df, standard_aicc)
        value = nll + pen
        valid = pen_ok and math.isfinite(nll)
        evaluated.append(SelectionRecord(lam, df, nll, value, criterion, valid, idx))
    best = None
    for rec in sorted(evaluated, key=lambda r: -r.lam):
        if not rec.valid:
            continue
        if best is None or rec.criterion_value < best.criterion_value:
            best = rec
    if best is None:
        raise NoValidModelError("all candidates invalid for criterion " + criterion)
    return best
