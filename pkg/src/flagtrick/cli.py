"""flagtrick command line: compare | ensemble | outliers | gen.

Exit codes: 0 success, 2 configuration error, 3 every run failed.
"""

import argparse
import json
import os
import sys

from .datagen import save_csv
from .errors import InvalidInput, ParseError
from .experiments import (ExperimentConfig, parse_data_spec, resolve_dataset,
                          run_compare, run_ensemble, run_outlier_scores)

CONFIG_ERROR = 2
ALL_RUNS_FAILED = 3


def _parse_seeds(spec: str):
    spec = spec.strip()
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(tok) for tok in spec.split(",") if tok != "")


def _parse_signature(spec: str):
    return tuple(int(tok) for tok in spec.split(",") if tok != "")


def _add_common(sub):
    sub.add_argument("--problem", choices=("pca", "rsr", "trace-ratio", "ssc", "dip"))
    sub.add_argument("--signature", help="comma list, e.g. 1,2,5")
    sub.add_argument("--data", help="CSV path or gen:<name>[:k=v,...]")
    sub.add_argument("--solver", choices=("sd", "fmf", "newton"))
    sub.add_argument("--seeds", help="range 0..9 or comma list")
    sub.add_argument("--beta", type=float, help="ssc sparsity weight")
    sub.add_argument("--knn-k", type=int, dest="knn_k")
    sub.add_argument("--out")
    sub.add_argument("--jobs", type=int)
    sub.add_argument("--center", choices=("none", "mean", "median"))
    sub.add_argument("--sigma", type=float, help="dip kernel bandwidth")
    sub.add_argument("--target-data", dest="target_data")
    sub.add_argument("--solver-config", dest="solver_config",
                     help="JSON dict of solver overrides")
    sub.add_argument("--config", help="JSON file with any of the above keys")


def build_parser():
    parser = argparse.ArgumentParser(prog="flagtrick",
                                     description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)
    for name, blurb in (("compare", "per-level Grassmann runs vs one flag run"),
                        ("ensemble", "multilevel kNN ensemble table"),
                        ("outliers", "per-sample residual scores"),
                        ("gen", "write a synthetic dataset to CSV")):
        sub = subs.add_parser(name, help=blurb)
        _add_common(sub)
    return parser


DEFAULTS = {"problem": "pca", "signature": (1, 2), "data": None, "solver": "sd",
            "seeds": (0,), "out": "out", "beta": 0.1, "knn_k": 5, "jobs": 1,
            "center": None, "sigma": None, "target_data": None,
            "solver_config": {}}


def resolve_config(args) -> ExperimentConfig:
    merged = dict(DEFAULTS)
    if args.config:
        with open(args.config) as fh:
            fromfile = json.load(fh)
        unknown = set(fromfile) - set(DEFAULTS)
        if unknown:
            raise InvalidInput(f"unknown config keys {sorted(unknown)}")
        merged.update(fromfile)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    if isinstance(merged["signature"], str):
        merged["signature"] = _parse_signature(merged["signature"])
    if isinstance(merged["seeds"], str):
        merged["seeds"] = _parse_seeds(merged["seeds"])
    if isinstance(merged["solver_config"], str):
        merged["solver_config"] = json.loads(merged["solver_config"])
    if merged["data"] is None:
        raise InvalidInput("--data is required")
    return ExperimentConfig(**merged)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "gen":
            return _gen(cfg)
        parse_data_spec(cfg.data)  # validate the spec before any run
        if args.command == "compare":
            summary = run_compare(cfg)
        elif args.command == "ensemble":
            summary = run_ensemble(cfg)
        elif args.command == "outliers":
            summary = run_outlier_scores(cfg)
        else:
            raise InvalidInput(f"unknown command {args.command!r}")
    except (InvalidInput, ParseError, FileNotFoundError,
            json.JSONDecodeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return CONFIG_ERROR
    if summary["n_success"] == 0:
        print("all runs failed", file=sys.stderr)
        return ALL_RUNS_FAILED
    return 0


def _gen(cfg: ExperimentConfig) -> int:
    kind = parse_data_spec(cfg.data)
    if kind[0] != "gen":
        raise InvalidInput("gen needs a gen:<name> data spec")
    data = resolve_dataset(cfg.data, cfg.seeds[0])
    out = cfg.out
    if os.path.isdir(out) or out.endswith(os.sep):
        os.makedirs(out, exist_ok=True)
        out = os.path.join(out, "dataset.csv")
    save_csv(data, out)
    print(f"wrote {data.p} x {data.n} dataset to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
