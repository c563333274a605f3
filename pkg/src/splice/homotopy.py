"""Weighted-l1 homotopy (LARS-LASSO) path solver over a sparse design.

Solves min_b ||y - Z b||^2 + lambda * sum_j w_j |b_j| for all lambda at once,
recording the breakpoints where the active set changes. Sign convention:
with gradient g = 2 Z'(Zb - y), an active coefficient satisfies
g_j = -sign(b_j) * lambda * w_j and inactive ones |g_j| <= lambda * w_j.

The design is a SparseColumnMatrix; all per-step heavy lifting (matvec,
rmatvec, column dots) goes through the kernel backend.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .linalg import DegenerateDesignError, SparseColumnMatrix

DRIFT_TOL = 1e-8
TIE_RTOL = 1e-12


@dataclass
class WeightedLassoProblem:
    design: SparseColumnMatrix
    response: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.response = np.asarray(self.response, dtype=np.float64)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if len(self.response) != self.design.n_rows:
            raise ValueError("response length must match design rows")
        if len(self.weights) != self.design.n_cols:
            raise ValueError("weights length must match design columns")
        if not np.all(np.isfinite(self.response)):
            raise ValueError("response contains non-finite values")
        if not (np.all(np.isfinite(self.weights)) and np.all(self.weights > 0)):
            raise ValueError("weights must be strictly positive and finite")


@dataclass
class StoppingRule:
    max_active: int | None = None
    min_lambda: float | None = None


@dataclass
class Breakpoint:
    lam: float
    active_set: tuple
    coefficients: np.ndarray


@dataclass
class LassoPath:
    breakpoints: list = field(default_factory=list)
    termination_reason: str = "lambda_zero"  # lambda_zero|max_active|min_lambda|max_steps

    @property
    def lambda_max(self):
        return self.breakpoints[0].lam

    def interpolate(self, lam):
        """Coefficients at lam; piecewise linear between breakpoints."""
        if lam < 0:
            raise ValueError("lambda must be nonnegative")
        bps = self.breakpoints
        if lam >= bps[0].lam:
            return np.zeros_like(bps[0].coefficients)
        lo_lam = bps[-1].lam
        if lam < lo_lam:
            if self.termination_reason == "lambda_zero" and lam == 0.0:
                return bps[-1].coefficients.copy()
            raise ValueError(
                f"lambda {lam} below last traced breakpoint {lo_lam} "
                f"(termination: {self.termination_reason})")
        # bps sorted by strictly decreasing lam
        lams = np.array([bp.lam for bp in bps])
        i = int(np.searchsorted(-lams, -lam, side="left"))  # first bp with lam_i <= lam
        if i < len(bps) and lams[i] == lam:
            return bps[i].coefficients.copy()
        hi, lo = bps[i - 1], bps[i]
        t = (hi.lam - lam) / (hi.lam - lo.lam)
        return (1 - t) * hi.coefficients + t * lo.coefficients

    def support_sets(self):
        """Active-support tuple per breakpoint (structural zeros respected)."""
        return [tuple(sorted(j for j in bp.active_set if bp.coefficients[j] != 0.0))
                for bp in self.breakpoints]


def _active_chol(design, active):
    """Cholesky of the active-set Gram matrix, built from scratch.

    Adds a tiny diagonal jitter when the Gram is numerically singular
    (active set at the design's rank limit); the drift check upstream
    decides whether the resulting direction is still usable.
    """
    k = len(active)
    G = np.empty((k, k))
    cols = np.asarray(active, dtype=np.int64)
    for i, j in enumerate(active):
        G[i, :] = design.column_dots(j, cols)
    G = 0.5 * (G + G.T)
    jitter = 0.0
    base = np.trace(G) / max(k, 1)
    for _ in range(4):
        try:
            return scipy.linalg.cholesky(G + jitter * np.eye(k), lower=True)
        except np.linalg.LinAlgError:
            jitter = max(jitter * 100.0, 1e-12 * base)
    return scipy.linalg.cholesky(G + jitter * np.eye(k), lower=True)


def _chol_append(L, g_cross, g_self):
    """Extend lower Cholesky factor with one new row/column of the Gram."""
    k = L.shape[0]
    out = np.zeros((k + 1, k + 1))
    out[:k, :k] = L
    if k:
        w = scipy.linalg.solve_triangular(L, g_cross, lower=True)
        out[k, :k] = w
        d = g_self - np.dot(w, w)
    else:
        d = g_self
    out[k, k] = np.sqrt(max(d, 1e-14 * max(g_self, 1.0)))
    return out


def trace_path(problem, stop=None, max_steps=None):
    """Trace the full weighted LASSO path from lambda_max downward."""
    Z = problem.design
    y = problem.response
    w = problem.weights
    q = Z.n_cols
    stop = stop or StoppingRule()
    if max_steps is None:
        max_steps = 10 * q

    norms = Z.column_norms_sq()
    if np.any(norms == 0.0):
        raise DegenerateDesignError("design has an all-zero column")
    if not np.all(np.isfinite(Z.data)):
        raise ValueError("design contains non-finite values")

    c = 2.0 * Z.rmatvec(y)
    crit = np.abs(c) / w
    lam = float(np.max(crit))
    b = np.zeros(q)
    r = y.copy()

    first = np.flatnonzero(crit >= lam * (1.0 - TIE_RTOL))
    j0 = int(first[0])

    path = LassoPath()
    path.breakpoints.append(Breakpoint(lam, (j0,), b.copy()))

    if stop.min_lambda is not None and lam <= stop.min_lambda:
        path.termination_reason = "min_lambda"
        return path
    if stop.max_active is not None and stop.max_active <= 0:
        path.termination_reason = "max_active"
        return path

    active = [j0]
    signs = {j0: 1.0 if c[j0] >= 0 else -1.0}
    L = _active_chol(Z, active)
    inactive_mask = np.ones(q, dtype=bool)
    inactive_mask[j0] = False

    reason = None
    step = 0
    while True:
        step += 1
        if step > max_steps:
            reason = "max_steps"
            break

        acols = np.asarray(active, dtype=np.int64)
        ws = w[acols] * np.array([signs[j] for j in active])

        def _direction(Lf):
            u = scipy.linalg.solve_triangular(Lf, 0.5 * ws, lower=True)
            return scipy.linalg.solve_triangular(Lf.T, u, lower=False)

        d = _direction(L)
        v = Z.subset_matvec(acols, d)       # Z_A d
        a = 2.0 * Z.rmatvec(v)              # rate of change of c per unit lambda
        scale = max(np.max(np.abs(ws)), 1.0)
        if np.max(np.abs(a[acols] - ws)) > DRIFT_TOL * scale:
            L = _active_chol(Z, active)
            d = _direction(L)
            v = Z.subset_matvec(acols, d)
            a = 2.0 * Z.rmatvec(v)

        # Activation candidates: c_j(t) = c_j - (lam - t) a_j meets +-t w_j.
        # Columns whose addition would make the active Gram numerically
        # singular are excluded for this step (design rank limit reached).
        lam_add = 0.0
        add_j = -1
        add_g_cross = add_g_self = None
        excluded = np.zeros(q, dtype=bool)
        while True:
            lam_add = 0.0
            add_j = -1
            inact = np.flatnonzero(inactive_mask & ~excluded)
            if len(inact) == 0:
                break
            cj, aj, wj = c[inact], a[inact], w[inact]
            with np.errstate(divide="ignore", invalid="ignore"):
                t_plus = (cj - lam * aj) / (wj - aj)
                t_minus = -(cj - lam * aj) / (wj + aj)
            cands = np.stack([t_plus, t_minus])
            cands[~np.isfinite(cands)] = -1.0
            cands[(cands <= 0) | (cands >= lam * (1.0 - TIE_RTOL))] = -1.0
            best = cands.max(axis=0)
            lam_add = float(best.max(initial=0.0))
            if lam_add <= 0.0:
                break
            ties = np.flatnonzero(best >= lam_add * (1.0 - TIE_RTOL))
            add_j = int(inact[ties[0]])
            lam_add = float(best[ties[0]])
            g_cross = Z.column_dots(add_j, acols)
            g_self = float(Z.column_dots(add_j, np.asarray([add_j], dtype=np.int64))[0])
            wv = scipy.linalg.solve_triangular(L, g_cross, lower=True)
            if g_self - np.dot(wv, wv) <= 1e-12 * g_self:
                excluded[add_j] = True
                continue
            add_g_cross, add_g_self = g_cross, g_self
            break

        # Drop candidates: b_j(t) = b_j + (lam - t) d_j crosses zero.
        lam_drop = 0.0
        drop_i = -1
        with np.errstate(divide="ignore", invalid="ignore"):
            t_drop = lam + b[acols] / d
        t_drop[~np.isfinite(t_drop)] = -1.0
        valid = (t_drop > 0) & (t_drop < lam * (1.0 - TIE_RTOL))
        if np.any(valid):
            drop_i = int(np.argmax(np.where(valid, t_drop, -1.0)))
            lam_drop = float(t_drop[drop_i])

        do_drop = drop_i >= 0 and lam_drop >= lam_add * (1.0 - TIE_RTOL)
        lam_next = lam_drop if do_drop else lam_add

        if add_j < 0 and drop_i < 0:
            if np.any(excluded):
                # Rank limit hit: boundary columns exist but cannot enter.
                reason = "degenerate"
                break
            # No further events: extend linearly to lambda = 0 (or to the
            # requested floor).
            lam_end = stop.min_lambda if stop.min_lambda is not None else 0.0
            dl = lam - lam_end
            b[acols] += dl * d
            r = r - dl * v
            path.breakpoints.append(
                Breakpoint(lam_end, tuple(sorted(active)), b.copy()))
            reason = "min_lambda" if lam_end > 0.0 else "lambda_zero"
            break

        if stop.min_lambda is not None and lam_next <= stop.min_lambda:
            dl = lam - stop.min_lambda
            b[acols] += dl * d
            r = r - dl * v
            path.breakpoints.append(
                Breakpoint(stop.min_lambda, tuple(sorted(active)), b.copy()))
            reason = "min_lambda"
            break

        dl = lam - lam_next
        b[acols] += dl * d
        r = r - dl * v
        lam = lam_next

        if do_drop:
            jd = active[drop_i]
            b[jd] = 0.0
            active.pop(drop_i)
            signs.pop(jd)
            inactive_mask[jd] = True
            L = _active_chol(Z, active) if active else np.zeros((0, 0))
        else:
            L = _chol_append(L, add_g_cross, add_g_self)
            active.append(add_j)
            inactive_mask[add_j] = False

        # Refresh correlations from the maintained residual (bounds drift).
        if step % 50 == 0:
            r = y - Z.matvec(b)
        c = 2.0 * Z.rmatvec(r)
        if do_drop:
            pass
        else:
            signs[add_j] = 1.0 if c[add_j] >= 0 else -1.0

        path.breakpoints.append(Breakpoint(lam, tuple(sorted(active)), b.copy()))

        if not active:
            # Everything dropped: re-seed from the boundary column (its
            # coefficient crosses zero and re-enters with the opposite sign).
            crit = np.abs(c) / w
            jn = int(np.argmax(crit))
            active = [jn]
            signs[jn] = 1.0 if c[jn] >= 0 else -1.0
            inactive_mask[jn] = False
            L = _active_chol(Z, active)
        if stop.max_active is not None and len(active) >= stop.max_active:
            reason = "max_active"
            break

    path.termination_reason = reason
    return path
