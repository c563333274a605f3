import math
import os

import numpy as np
import pytest

from splice.cli import main
from splice.experiment import (ExperimentSpec, psd_fraction, run_experiment,
                               run_psd_experiment)
from splice.metrics import EigenPathRecord
from splice.reports import emit_outputs, load_records_csv, summarize_records


def small_spec(**kw):
    base = dict(kind="ar1", p=4, n=60, replications=2,
                methods=("splice", "cholesky"), criteria=("AIC",), seed=11)
    base.update(kw)
    return ExperimentSpec(**base)


def test_record_count_invariant():
    spec = small_spec(methods=("splice", "cholesky", "ridge"),
                      criteria=("AIC", "BIC"))
    res = run_experiment(spec)
    assert len(res.records) == spec.replications * 3 * 2
    assert res.errors == []


def test_smoke_single_replication_finite_metrics():
    spec = small_spec(kind="ar1", p=3, n=50, replications=1, methods=("splice",))
    res = run_experiment(spec)
    rec = res.records[0]
    for k in ("lambda", "quad_loss", "entropy_loss", "spec_norm_C",
              "spec_norm_Sigma", "min_eig"):
        assert math.isfinite(rec[k])
    assert rec["psd"] in (0, 1)


def test_worker_count_does_not_change_results():
    spec = small_spec()
    r1 = run_experiment(spec, workers=1)
    r2 = run_experiment(spec, workers=2)
    for a, b in zip(r1.records, r2.records):
        for k in a:
            if k == "runtime_ms":
                continue
            assert a[k] == b[k] or (isinstance(a[k], float)
                                    and math.isnan(a[k]) and math.isnan(b[k]))


def test_spec_validation():
    with pytest.raises(ValueError):
        small_spec(replications=0)
    with pytest.raises(ValueError):
        small_spec(methods=())
    with pytest.raises(ValueError):
        small_spec(methods=("glasso",))
    with pytest.raises(ValueError):
        small_spec(criteria=("GCV",))


def test_round_trip_full_precision(tmp_path):
    res = run_experiment(small_spec())
    emit_outputs(res, tmp_path)
    back = load_records_csv(tmp_path / "records.csv")
    assert len(back) == len(res.records)
    for a, b in zip(res.records, back):
        for k in a:
            va, vb = a[k], b[k]
            if isinstance(va, float) and math.isnan(va):
                assert math.isnan(vb)
            else:
                assert va == vb


def test_summary_structure():
    res = run_experiment(small_spec())
    summary = summarize_records(res.records)
    assert set(summary) == {"splice/AIC", "cholesky/AIC"}
    entry = summary["splice/AIC"]
    assert entry["count"] == 2
    assert {"mean", "q1", "median", "q3"} <= set(entry["quad_loss"])


def test_psd_fraction_measure():
    recs = [EigenPathRecord(1.0, 1.0), EigenPathRecord(0.5, 1.0),
            EigenPathRecord(0.25, -1.0), EigenPathRecord(0.0, -1.0)]
    # PSD on [0.5, 1.0] only: half of the unit lambda_bar axis
    assert np.isclose(psd_fraction(recs), 0.5)


def test_psd_experiment_small():
    spec = ExperimentSpec(kind="random", p=8, n=12, replications=2,
                          methods=("splice",), criteria=("AIC",), seed=3,
                          params={"df": 10})
    res = run_psd_experiment(spec)
    assert len(res.eigen_paths) == 2
    for ep in res.eigen_paths:
        rels = [r.lambda_rel for r in ep]
        assert max(rels) == 1.0 and min(rels) >= 0.0
        # fully regularized endpoint: diagonal estimate, hence PSD
        assert ep[0].min_eigenvalue > 0
    assert all(0.0 <= f <= 1.0 for f in res.psd_fractions)


def _write_config(path, **extra):
    lines = ["kind: ar1", "p: 4", "n: 60", "replications: 2",
             "methods: [splice, cholesky]", "criteria: [AIC]", "seed: 11"]
    lines += [f"{k}: {v}" for k, v in extra.items()]
    path.write_text("\n".join(lines) + "\n")


def test_cli_run_and_determinism(tmp_path):
    cfg = tmp_path / "exp.yaml"
    _write_config(cfg)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(cfg), "--output", str(out1)]) == 0
    assert main(["run", str(cfg), "--output", str(out2)]) == 0

    def stable(path):
        # drop the runtime column (wall-clock, inherently nondeterministic)
        return "\n".join(",".join(line.split(",")[:-1])
                         for line in path.read_text().splitlines())

    assert stable(out1 / "records.csv") == stable(out2 / "records.csv")
    assert (out1 / "summary.json").exists()
    assert (out1 / "roc_splice.csv").exists()


def test_cli_flag_overrides(tmp_path):
    cfg = tmp_path / "exp.yaml"
    _write_config(cfg)
    out = tmp_path / "o"
    assert main(["run", str(cfg), "--output", str(out),
                 "--replications", "1", "--format", "json"]) == 0
    assert (out / "records.json").exists()
    import json
    rows = json.loads((out / "records.json").read_text())
    assert len(rows) == 2        # 1 replication x 2 methods x 1 criterion


def test_cli_summarize_and_roc(tmp_path, capsys):
    cfg = tmp_path / "exp.yaml"
    _write_config(cfg)
    out = tmp_path / "o"
    main(["run", str(cfg), "--output", str(out)])
    capsys.readouterr()
    assert main(["summarize", str(out)]) == 0
    assert "splice/AIC" in capsys.readouterr().out
    assert main(["roc", str(out)]) == 0
    assert "true_positives" in capsys.readouterr().out


def test_cli_psd_run(tmp_path, capsys):
    cfg = tmp_path / "psd.yaml"
    cfg.write_text("kind: random\np: 8\nn: 12\nreplications: 2\n"
                   "methods: [splice]\ncriteria: [AIC]\nseed: 3\ndf: 10\n")
    out = tmp_path / "o"
    assert main(["psd-run", str(cfg), "--output", str(out)]) == 0
    assert (out / "eigenpath.csv").exists()
    assert "PSD path fraction" in capsys.readouterr().out


def test_cli_rejects_unknown_config_keys(tmp_path):
    cfg = tmp_path / "bad.yaml"
    _write_config(cfg, bogus=1)
    with pytest.raises(ValueError):
        main(["run", str(cfg), "--output", str(tmp_path / "o")])
