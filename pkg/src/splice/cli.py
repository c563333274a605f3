"""Command-line experiment runner.

Verbs:
  run <config>        replicated estimation experiment from a YAML config
  psd-run <config>    minimum-eigenvalue path experiment (Wishart design)
  summarize <dir>     print the summary of a previously written records file
  roc <dir>           print the ROC plot-data files in a result directory

Flags --seed / --replications / --workers / --output / --format override
the corresponding config entries.
"""

import argparse
import glob
import json
import os
import sys

import yaml

from . import reports
from .experiment import ExperimentSpec, run_experiment, run_psd_experiment

TOPOLOGY_KEYS = ("strength", "rho", "phi", "long_range", "df")


def load_spec(path, overrides):
    with open(path) as f:
        cfg = yaml.safe_load(f) or {}
    for key in ("seed", "replications"):
        if overrides.get(key) is not None:
            cfg[key] = overrides[key]
    params = {k: cfg.pop(k) for k in list(cfg) if k in TOPOLOGY_KEYS}
    out = cfg.pop("output", None)
    fmt = cfg.pop("format", "csv")
    spec = ExperimentSpec(
        kind=cfg.pop("kind"),
        p=int(cfg.pop("p", 15)),
        n=int(cfg.pop("n", 1000)),
        replications=int(cfg.pop("replications", 20)),
        methods=tuple(cfg.pop("methods", ["splice"])),
        criteria=tuple(cfg.pop("criteria", ["AIC"])),
        seed=int(cfg.pop("seed", 0)),
        max_active=cfg.pop("max_active", None),
        min_lambda=cfg.pop("min_lambda", None),
        params=params)
    if cfg:
        raise ValueError(f"unknown config keys: {sorted(cfg)}")
    return spec, out, fmt


def _resolve_output(config_path, cfg_out, flag_out):
    if flag_out:
        return flag_out
    if cfg_out:
        return cfg_out
    stem = os.path.splitext(os.path.basename(config_path))[0]
    return os.path.join("results", stem)


def cmd_run(args, psd=False):
    spec, cfg_out, cfg_fmt = load_spec(args.config, vars(args))
    outdir = _resolve_output(args.config, cfg_out, args.output)
    fmt = args.format or cfg_fmt
    runner = run_psd_experiment if psd else run_experiment
    result = runner(spec, workers=args.workers)
    written = reports.emit_outputs(result, outdir, fmt)
    for path in written:
        print(path)
    if psd and result.psd_fractions:
        avg = sum(result.psd_fractions) / len(result.psd_fractions)
        print(f"mean PSD path fraction: {avg:.4f}")
    if result.errors:
        print(f"{len(result.errors)} replication error(s); see errors.csv",
              file=sys.stderr)
    return 0


def cmd_summarize(args):
    path = os.path.join(args.result_dir, "records.csv")
    if not os.path.exists(path):
        print(f"no records.csv under {args.result_dir}", file=sys.stderr)
        return 1
    summary = reports.summarize_records(reports.load_records_csv(path))
    json.dump(summary, sys.stdout, indent=1, sort_keys=True)
    print()
    return 0


def cmd_roc(args):
    paths = sorted(glob.glob(os.path.join(args.result_dir, "roc_*.csv")))
    if not paths:
        print(f"no ROC files under {args.result_dir}", file=sys.stderr)
        return 1
    for path in paths:
        print(f"# {path}")
        with open(path) as f:
            sys.stdout.write(f.read())
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="splice",
        description="sparse precision-matrix estimation experiments")
    sub = parser.add_subparsers(dest="verb", required=True)

    def add_run(name):
        sp = sub.add_parser(name)
        sp.add_argument("config")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--replications", type=int, default=None)
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--output", default=None)
        sp.add_argument("--format", choices=("csv", "json"), default=None)
        return sp

    add_run("run")
    add_run("psd-run")
    for name in ("summarize", "roc"):
        sp = sub.add_parser(name)
        sp.add_argument("result_dir")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.verb == "run":
        return cmd_run(args)
    if args.verb == "psd-run":
        return cmd_run(args, psd=True)
    if args.verb == "summarize":
        return cmd_summarize(args)
    return cmd_roc(args)


if __name__ == "__main__":
    sys.exit(main())
