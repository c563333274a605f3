"""Result persistence: per-replication record files, summaries, plot data.

Numbers are serialized with 17 significant digits so a write-read round
trip reproduces every float bit-exactly; summary statistics are always
computed from in-memory records, never from the text files.
"""

import csv
import json
import math
import os

import numpy as np

from .experiment import RECORD_FIELDS
from .metrics import roc_curve

_INT_FIELDS = {"replication", "df", "psd"}
_STR_FIELDS = {"method", "criterion"}
SUMMARY_METRICS = ("quad_loss", "entropy_loss", "spec_norm_C", "spec_norm_Sigma",
                   "psd", "min_eig")


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_records_csv(records, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(RECORD_FIELDS)
        for rec in records:
            w.writerow([_fmt(rec[k]) for k in RECORD_FIELDS])


def write_records_json(records, path):
    rows = []
    for rec in records:
        row = {}
        for k in RECORD_FIELDS:
            v = rec[k]
            if k in _STR_FIELDS:
                row[k] = v
            elif k in _INT_FIELDS:
                row[k] = int(v)
            else:
                row[k] = _fmt(v)       # strings keep full precision in json too
        rows.append(row)
    with open(path, "w") as f:
        json.dump(rows, f, indent=1)
        f.write("\n")


def load_records_csv(path):
    records = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames) != RECORD_FIELDS:
            raise ValueError(f"unexpected header in {path}")
        for row in reader:
            rec = {}
            for k in RECORD_FIELDS:
                if k in _STR_FIELDS:
                    rec[k] = row[k]
                elif k in _INT_FIELDS:
                    rec[k] = int(row[k])
                else:
                    rec[k] = float(row[k])
            records.append(rec)
    return records


def summarize_records(records):
    """means and quartiles per method x criterion x metric (runtime excluded)."""
    groups = {}
    for rec in records:
        groups.setdefault((rec["method"], rec["criterion"]), []).append(rec)
    out = {}
    for (method, criterion), recs in sorted(groups.items()):
        entry = {"count": len(recs)}
        for m in SUMMARY_METRICS:
            vals = np.array([r[m] for r in recs], dtype=float)
            vals = vals[np.isfinite(vals)]
            if len(vals) == 0:
                entry[m] = None
                continue
            q1, med, q3 = np.percentile(vals, [25, 50, 75])
            entry[m] = {"mean": float(np.mean(vals)), "q1": float(q1),
                        "median": float(med), "q3": float(q3)}
        out[f"{method}/{criterion}"] = entry
    return out


def emit_outputs(result, outdir, fmt="csv"):
    """Write record file, summary, ROC curves, and eigen-path plot data."""
    if not result.records and not result.eigen_paths:
        raise ValueError("empty result")
    os.makedirs(outdir, exist_ok=True)
    written = []

    if result.records:
        if fmt == "json":
            path = os.path.join(outdir, "records.json")
            write_records_json(result.records, path)
        else:
            path = os.path.join(outdir, "records.csv")
            write_records_csv(result.records, path)
        written.append(path)
        spath = os.path.join(outdir, "summary.json")
        with open(spath, "w") as f:
            json.dump(summarize_records(result.records), f, indent=1, sort_keys=True)
            f.write("\n")
        written.append(spath)

    if result.errors:
        epath = os.path.join(outdir, "errors.csv")
        with open(epath, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(("replication", "method", "kind", "message"))
            w.writerows(result.errors)
        written.append(epath)

    for method, per_rep in sorted(result.supports.items()):
        if not any(per_rep) or not result.truth_supports:
            continue
        truth = result.truth_supports[0]
        if any(t != truth for t in result.truth_supports):
            continue                        # redrawn truths: no common ROC axis
        curve = roc_curve(per_rep, truth)
        rpath = os.path.join(outdir, f"roc_{method}.csv")
        with open(rpath, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(("true_positives", "avg_min_false_positives"))
            for t, fp in zip(curve.true_positive_counts, curve.false_positives):
                w.writerow((int(t), _fmt(fp)))
        written.append(rpath)

    if result.eigen_paths:
        epath = os.path.join(outdir, "eigenpath.csv")
        with open(epath, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(("replication", "lambda_rel", "min_eig"))
            for rep, ep in enumerate(result.eigen_paths):
                for r in ep:
                    w.writerow((rep, _fmt(r.lambda_rel), _fmt(r.min_eigenvalue)))
        written.append(epath)
        fpath = os.path.join(outdir, "psd_fractions.csv")
        with open(fpath, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(("replication", "psd_fraction"))
            for rep, frac in enumerate(result.psd_fractions):
                w.writerow((rep, _fmt(frac)))
        written.append(fpath)

    return written
