"""Command-line entry point.

::

    goodset audit range    --config cfg.yaml [--set key=value ...] --out DIR
    goodset audit min-abs  --config cfg.yaml --out DIR
    goodset audit bgl      --config cfg.yaml --out DIR
    goodset selective prep --config cfg.yaml --out DIR
    goodset evaluate       --config cfg.yaml --model report.json --out DIR
    goodset synth gen      --config cfg.yaml --out DIR

Exit codes: 0 report written, 2 empty good set, 1 error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import audit
from .data import reveal_ground_truth, write_csv
from .errors import GoodsetError


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="YAML configuration file")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config entry, e.g. expgrad.delta=0.05 (repeatable)")
    p.add_argument("--out", help="output directory (defaults to the config's 'out')")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="goodset", description="Audit predictive disparities "
                                     "over the set of models within a loss tolerance of a benchmark.")
    sub = parser.add_subparsers(dest="group", required=True)

    a = sub.add_parser("audit", help="solve over the good set and write a report")
    asub = a.add_subparsers(dest="action", required=True)
    for name, text in (("range", "minimum and maximum disparity"),
                       ("min-abs", "minimum absolute disparity"),
                       ("bgl", "minimum bounded-group-loss disparity")):
        _common(asub.add_parser(name, help=text))

    s = sub.add_parser("selective", help="selective-labels utilities")
    ssub = s.add_subparsers(dest="action", required=True)
    _common(ssub.add_parser("prep", help="write pseudo-labelled training data for the configured pipeline"))

    e = sub.add_parser("evaluate", help="evaluate saved models on the configured test split")
    _common(e)
    e.add_argument("--model", required=True, help="report.json or a model JSON file")
    e.add_argument("--which", help="run name inside report.json (default: all)")

    g = sub.add_parser("synth", help="synthetic data")
    gsub = g.add_subparsers(dest="action", required=True)
    _common(gsub.add_parser("gen", help="write the synthetic selective-labels dataset to CSV"))
    return parser


def _selective_prep(cfg, out: Path):
    p = audit.prepare(cfg)
    out.mkdir(parents=True, exist_ok=True)
    ds = p.train
    path = out / "train_pseudo.csv"
    if hasattr(ds, "y_hat"):
        write_csv(ds.base, path)
        frame = pd.read_csv(path)
        frame["y_hat"] = ds.y_hat
        frame["mu_hat"] = ds.mu_hat
        frame["provenance"] = ds.provenance
        frame.to_csv(path, index=False, float_format="%.17g")
    else:
        write_csv(ds, path)
    return [path]


def _synth_gen(cfg, out: Path):
    cfg = dict(cfg)
    if cfg["data"].get("source") != "synthetic":
        cfg["data"] = {"source": "synthetic", **{k: v for k, v in cfg["data"].items() if k != "source"}}
    ds = audit.load_data(cfg)
    out.mkdir(parents=True, exist_ok=True)
    data_path = write_csv(ds, out / "synthetic.csv")
    truth = reveal_ground_truth(ds)
    truth_path = out / "synthetic_truth.csv"
    np.savetxt(truth_path, np.column_stack([truth.y_star, truth.mu, truth.pi]), delimiter=",",
               header="y_star,mu,pi", comments="", fmt="%.17g")
    return [data_path, truth_path]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = audit.load_config(args.config, args.overrides)
        out = Path(args.out or cfg["out"])
        digest = audit.config_hash(cfg)
        print(f"config_hash {digest}")
        if args.group == "audit":
            run = {"range": audit.run_range_audit, "min-abs": audit.run_min_abs,
                   "bgl": audit.run_bgl}[args.action]
            report = run(cfg, command=f"audit {args.action}")
            files = audit.render_report(report, out)
            code = report.exit_code
            for flag in report.summary.get("flags", []):
                print(f"warning: {flag}", file=sys.stderr)
        elif args.group == "evaluate":
            report = audit.evaluate_saved(cfg, args.model, args.which)
            files = audit.render_report(report, out)
            code = 0
        elif args.group == "selective":
            files, code = _selective_prep(cfg, out), 0
        else:
            files, code = _synth_gen(cfg, out), 0
    except (GoodsetError, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for f in files:
        print(f"wrote {f}")
    return code


if __name__ == "__main__":
    sys.exit(main())
