"""Replicated simulation experiments over the estimation methods.

One experiment = a truth topology, a sample size, a set of methods and
selection criteria, and a replication count. Each replication generates (or
redraws) the truth, samples Gaussian data, fits every requested method,
selects lambda per criterion, and scores the chosen precision estimate with
quadratic loss, entropy loss, and spectral-norm errors, plus PSD
diagnostics. Everything is deterministic given the seed; replications run
on seed-split generator streams so the worker count never changes results.
"""

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from . import cholesky as chol
from . import metrics, selection, simgen
from .estimator import btilde_matrix, build_symmetric_design, fit_splice_path, precision_from_params
from .homotopy import StoppingRule, WeightedLassoProblem, trace_path
from .ridge import fit_ridge

METHODS = ("splice", "cholesky", "cholesky_inverted", "ridge")
RECORD_FIELDS = ("method", "criterion", "replication", "lambda", "df",
                 "quad_loss", "entropy_loss", "spec_norm_C", "spec_norm_Sigma",
                 "psd", "min_eig", "runtime_ms")
PSD_EIG_TOL = -1e-10
RIDGE_GRID_SIZE = 25


@dataclass
class ExperimentSpec:
    kind: str                   # star_direct|star_inverted|ar1|ar2|ar1_long|random
    p: int = 15
    n: int = 1000
    replications: int = 20
    methods: tuple = METHODS
    criteria: tuple = ("AIC",)
    seed: int = 0
    max_active: int | None = None
    min_lambda: float | None = None
    params: dict = field(default_factory=dict)   # topology extras (strength, rho, df, ...)

    def __post_init__(self):
        self.methods = tuple(self.methods)
        self.criteria = tuple(self.criteria)
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not self.methods or not self.criteria:
            raise ValueError("need at least one method and one criterion")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        for c in self.criteria:
            if c not in selection.CRITERIA:
                raise ValueError(f"unknown criterion {c!r}")

    def stopping_rule(self):
        return StoppingRule(self.max_active, self.min_lambda)


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    records: list = field(default_factory=list)       # dicts keyed by RECORD_FIELDS
    errors: list = field(default_factory=list)        # (replication, method, kind, message)
    supports: dict = field(default_factory=dict)      # method -> list per rep of support sets
    truth_supports: list = field(default_factory=list)
    eigen_paths: list = field(default_factory=list)   # per rep: list of EigenPathRecord
    psd_fractions: list = field(default_factory=list)


def make_truth(spec, rng):
    """True precision matrix for the topology named in the spec."""
    p, extra = spec.p, spec.params
    if spec.kind == "star_direct":
        return simgen.star_precision(p, hub_first=True, strength=extra.get("strength"))
    if spec.kind == "star_inverted":
        return simgen.star_precision(p, hub_first=False, strength=extra.get("strength"))
    if spec.kind in ("ar1", "ar2", "ar1_long"):
        return simgen.ar_precision(p, variant=spec.kind,
                                   rho=extra.get("rho", 0.7),
                                   phi=tuple(extra.get("phi", (0.4, 0.2))),
                                   long_range=extra.get("long_range", 0.2))
    if spec.kind == "random":
        return simgen.sample_random_precision(p, rng)
    raise ValueError(f"unknown topology kind {spec.kind!r}")


def _score(c_true, sigma_true, c_hat):
    eig_min = float(np.linalg.eigvalsh(0.5 * (c_hat + c_hat.T))[0])
    psd = eig_min >= PSD_EIG_TOL
    quad = ent = sn_sigma = math.nan
    if eig_min > 0:
        quad = metrics.quadratic_loss(c_true, c_hat)
        ent = metrics.entropy_loss(c_true, c_hat)
        sn_sigma = metrics.spectral_norm_error(np.linalg.inv(c_hat), sigma_true)
    return {"quad_loss": quad, "entropy_loss": ent,
            "spec_norm_C": metrics.spectral_norm_error(c_hat, c_true),
            "spec_norm_Sigma": sn_sigma, "psd": int(psd), "min_eig": eig_min}


def _record(method, criterion, rep, lam, df, scores, runtime_ms):
    rec = {"method": method, "criterion": criterion, "replication": rep,
           "lambda": lam, "df": df, "runtime_ms": runtime_ms}
    rec.update(scores)
    return {k: rec[k] for k in RECORD_FIELDS}


def _fit_cholesky(x, spec, criterion, inverted):
    n, p = x.shape
    ordering = chol.inverted_ordering(p) if inverted else None
    path = chol.fit_cholesky_path(x, ordering=ordering, stop=spec.stopping_rule())
    records = []
    for lam in path.merged_lambdas:
        u = path.u_at(lam)
        d2 = chol.residual_d2_at(path, x, lam)
        d2 = np.maximum(d2, 1e-12 * path.d2)
        c_slot = chol.precision_from_cholesky(u, d2)
        ordr = path.ordering
        c = np.empty((p, p))
        c[np.ix_(ordr, ordr)] = c_slot
        df = p + len(path.support_at(lam))
        records.append((float(lam), c, df))
    best = None
    for lam, c, df in records:       # lambdas descend: ties keep larger lambda
        nll = selection.gaussian_nll_precision(x, c)
        pen, ok = selection.criterion_penalty(criterion, n, df)
        if not (ok and math.isfinite(nll)):
            continue
        if best is None or nll + pen < best[0]:
            best = (nll + pen, lam, c, df)
    if best is None:
        raise selection.NoValidModelError("no valid point on Cholesky path")
    return best[1], best[2], best[3], path


def _fit_ridge_grid(x, criterion):
    """Ridge over a log-spaced lambda2 grid; criterion reduces to min nll
    because the ridge estimate is dense (constant df)."""
    n, p = x.shape
    x = x - x.mean(axis=0, keepdims=True)
    marg = np.einsum("ij,ij->j", x, x) / n
    d = np.sqrt(marg)
    xt = x / d[None, :]
    grid = np.logspace(math.log10(n * p), math.log10(1e-3), RIDGE_GRID_SIZE)
    df = p + p * (p - 1) // 2
    best = None
    for lam2 in grid:
        est = fit_ridge(xt, lam2)
        c = ((np.eye(p) - est.btilde) / d[:, None]) / d[None, :]
        c = 0.5 * (c + c.T)
        nll = selection.gaussian_nll_precision(x, c)
        pen, ok = selection.criterion_penalty(criterion, n, df)
        if not (ok and math.isfinite(nll)):
            continue
        if best is None or nll + pen < best[0]:
            best = (nll + pen, float(lam2), c)
    if best is None:
        raise selection.NoValidModelError("no valid ridge point")
    return best[1], best[2], df


def _splice_supports(fit):
    """Distinct pair-level supports visited by the final traced path."""
    out = []
    for s in fit.btilde_path.support_sets():
        out.append(frozenset(fit.pairs[i] for i in s))
    return out


def _cholesky_supports(path):
    return [frozenset(path.support_at(lam)) for lam in path.merged_lambdas]


def run_replication(spec, rep, seed_seq):
    """All method x criterion records (and support paths) for one replication."""
    rng = np.random.default_rng(seed_seq)
    c_true = make_truth(spec, rng)
    sigma_true = np.linalg.inv(c_true)
    x = simgen.gaussian_sample(c_true, spec.n, rng)
    truth = frozenset(metrics.true_support(c_true))

    records, errors, supports = [], [], {}
    for method in spec.methods:
        for criterion in spec.criteria:
            t0 = time.perf_counter()
            try:
                if method == "splice":
                    fit = fit_splice_path(x, criterion=criterion,
                                          stop=spec.stopping_rule())
                    est = precision_from_params(fit.final_params)
                    lam, c_hat = fit.lambda_selected, est.matrix
                    df = selection.degrees_of_freedom(fit.final_params.b)
                    if criterion == spec.criteria[0]:
                        supports[method] = _splice_supports(fit)
                elif method in ("cholesky", "cholesky_inverted"):
                    lam, c_hat, df, path = _fit_cholesky(
                        x, spec, criterion, method == "cholesky_inverted")
                    if criterion == spec.criteria[0]:
                        supports[method] = _cholesky_supports(path)
                else:
                    lam, c_hat, df = _fit_ridge_grid(x, criterion)
                ms = (time.perf_counter() - t0) * 1000.0
                records.append(_record(method, criterion, rep, lam, df,
                                       _score(c_true, sigma_true, c_hat), ms))
            except Exception as e:       # isolate failures; batch must finish
                errors.append((rep, method, type(e).__name__, str(e)))
                ms = (time.perf_counter() - t0) * 1000.0
                scores = {"quad_loss": math.nan, "entropy_loss": math.nan,
                          "spec_norm_C": math.nan, "spec_norm_Sigma": math.nan,
                          "psd": 0, "min_eig": math.nan}
                records.append(_record(method, criterion, rep,
                                       math.nan, -1, scores, ms))
    return records, errors, supports, truth


def _rep_worker(args):
    return run_replication(*args)


def run_experiment(spec, workers=1):
    """Run all replications; deterministic given spec.seed for any workers."""
    seqs = np.random.SeedSequence(spec.seed).spawn(spec.replications)
    jobs = [(spec, rep, seqs[rep]) for rep in range(spec.replications)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(_rep_worker, jobs))
    else:
        outs = [_rep_worker(j) for j in jobs]

    result = ExperimentResult(spec)
    for method in spec.methods:
        result.supports[method] = []
    for rep, (records, errors, supports, truth) in enumerate(outs):
        result.records.extend(records)
        result.errors.extend(errors)
        result.truth_supports.append(truth)
        for method in spec.methods:
            result.supports[method].append(supports.get(method, []))
    return result


def psd_fraction(eigen_path):
    """lambda_bar-measure of the traced path where the estimate is PSD.

    An interval between consecutive records counts as PSD when both of its
    endpoint estimates are.
    """
    recs = sorted(eigen_path, key=lambda r: -r.lambda_rel)
    total = good = 0.0
    for a, b in zip(recs[:-1], recs[1:]):
        span = a.lambda_rel - b.lambda_rel
        total += span
        if a.min_eigenvalue >= PSD_EIG_TOL and b.min_eigenvalue >= PSD_EIG_TOL:
            good += span
    return good / total if total > 0 else 1.0


def run_psd_replication(spec, rep, seed_seq):
    """Trace one full regularization path on a near-singular Wishart draw and
    record the minimum eigenvalue of the precision estimate along it."""
    rng = np.random.default_rng(seed_seq)
    p = spec.p
    sigma = simgen.wishart_near_singular(df=spec.params.get("df", 40), p=p, rng=rng)
    x = rng.multivariate_normal(np.zeros(p), sigma, size=spec.n, method="eigh")
    x = x - x.mean(axis=0, keepdims=True)
    d2 = np.einsum("ij,ij->j", x, x) / spec.n
    design = build_symmetric_design(x, d2)
    path = trace_path(WeightedLassoProblem(design.z, design.y, design.weights),
                      spec.stopping_rule())
    d = np.sqrt(d2)
    lams, mats = [], []
    for bp in path.breakpoints:
        bt = btilde_matrix(bp.coefficients, design.pairs, p)
        c = ((np.eye(p) - bt) / d[:, None]) / d[None, :]
        lams.append(bp.lam)
        mats.append(c)
    return metrics.min_eigenvalue_path(lams, mats, lambda_max=path.lambda_max)


def run_psd_experiment(spec, workers=1):
    seqs = np.random.SeedSequence(spec.seed).spawn(spec.replications)
    jobs = [(spec, rep, seqs[rep]) for rep in range(spec.replications)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            paths = list(pool.map(_psd_worker, jobs))
    else:
        paths = [_psd_worker(j) for j in jobs]
    result = ExperimentResult(spec)
    result.eigen_paths = paths
    result.psd_fractions = [psd_fraction(ep) for ep in paths]
    return result


def _psd_worker(args):
    return run_psd_replication(*args)
