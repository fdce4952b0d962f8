"""Command-line interface: ``mrmrfs synth | select | benchmark``.

Every setting resolves as: explicit flag, else the ``--config`` JSON file
(either a bare config object or a ``manifest.json`` from an earlier run),
else the built-in default. The resolved settings are echoed into
``manifest.json`` next to the outputs, so ``--config <out>/manifest.json``
reproduces a run.

All randomness derives from ``--seed``:

* ``synth``: the synthetic spec seed is ``--seed`` itself;
* ``select``: relevance forest seed ``derive_seed(seed, "relevance-forest")``,
  RDC seed ``derive_seed(seed, "rdc")``;
* ``benchmark``: see :mod:`mrmrfs.evaluation`.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import logging
import os
import sys

from mrmrfs import __version__, measures
from mrmrfs._seeding import derive_seed
from mrmrfs.classifiers import CLASSIFIERS
from mrmrfs.dataset import DatasetError, load_csv
from mrmrfs.evaluation import EvalConfig, run_benchmark, write_report
from mrmrfs.forest import ForestParams
from mrmrfs.selector import METHODS, get_method, redundancy_heatmap, select
from mrmrfs.synth import SyntheticSpec, generate, write_csv

log = logging.getLogger("mrmrfs")

MANIFEST_FILE = "manifest.json"

SYNTH_DEFAULTS = {
    "n": 100_000, "seed": 0, "n_informative": 10, "n_linear_redundant": 20,
    "n_nonlinear_redundant": 20, "n_irrelevant": 20, "error_sd": 0.1, "n_splines": 10,
}
FOREST_DEFAULTS = {"n_trees": 50, "max_depth": 10, "min_samples_leaf": 50, "max_features": "sqrt"}
RDC_DEFAULTS = {"rdc_k": 5, "rdc_s": 1.0 / 6.0, "rdc_repetitions": 5}
SELECT_DEFAULTS = {
    "data": None, "label": "y", "method": None, "top_k": 20, "seed": 0, "bins": 10,
    "heatmap": False, **FOREST_DEFAULTS, **RDC_DEFAULTS,
}
BENCH_DEFAULTS = {
    "data": None, "label": "y", "synthetic": False, **SYNTH_DEFAULTS, "n": 10_000,
    "methods": list(METHODS), "classifiers": list(CLASSIFIERS), "top_k": 20,
    "feature_counts": None, "folds": 4, "trials": 10, "train_fraction": 0.5,
    "bins": 10, "all_features": True, "choose_n": False, "choose_n_max": 50,
    "choose_n_tolerance": 0.0, **FOREST_DEFAULTS, **RDC_DEFAULTS,
}


class CliError(Exception):
    pass


# ------------------------------------------------------------ helpers

def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _counts(text: str) -> list[int]:
    """Parse ``"1-20"``, ``"5,10,15"`` or a mix such as ``"1-3,10"``."""
    out = []
    for part in _csv_list(text):
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _file_fingerprint(path: str) -> dict:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return {"path": path, "size": os.path.getsize(path), "sha256": h.hexdigest()}


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    file_cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read config {args.config}: {exc}") from None
        if "config" in file_cfg and "command" in file_cfg:
            file_cfg = file_cfg["config"]
        unknown = set(file_cfg) - set(defaults)
        if unknown:
            raise CliError(f"unknown keys in config file: {', '.join(sorted(unknown))}")
    cfg = {}
    for key, default in defaults.items():
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
        elif key in file_cfg:
            cfg[key] = file_cfg[key]
        else:
            cfg[key] = default
    return cfg


def _write_manifest(out: str, command: str, cfg: dict, inputs: list[str], started: str) -> None:
    manifest = {
        "command": command,
        "config": cfg,
        "seed": cfg.get("seed"),
        "inputs": [_file_fingerprint(p) for p in inputs],
        "tool_version": __version__,
        "started_at": started,
        "finished_at": _now(),
    }
    with open(os.path.join(out, MANIFEST_FILE), "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def _forest(cfg: dict, seed: int) -> ForestParams:
    return ForestParams(n_trees=cfg["n_trees"], max_depth=cfg["max_depth"],
                        min_samples_leaf=cfg["min_samples_leaf"],
                        max_features=cfg["max_features"], seed=seed)


def _rdc(cfg: dict, seed: int) -> measures.RdcParams:
    return measures.RdcParams(k=cfg["rdc_k"], s=cfg["rdc_s"], seed=seed,
                              repetitions=cfg["rdc_repetitions"])


def _spec(cfg: dict) -> SyntheticSpec:
    return SyntheticSpec(**{k: cfg[k] for k in SYNTH_DEFAULTS})


# ------------------------------------------------------------ commands

def cmd_synth(args: argparse.Namespace) -> int:
    started = _now()
    cfg = _resolve(args, SYNTH_DEFAULTS)
    data, truth = generate(_spec(cfg))
    os.makedirs(args.out, exist_ok=True)
    data_path, meta_path = write_csv(data, truth, args.out)
    _write_manifest(args.out, "synth", cfg, [], started)
    print(f"wrote {data.n} rows x {data.m} features to {data_path}")
    return 0


def cmd_select(args: argparse.Namespace) -> int:
    started = _now()
    cfg = _resolve(args, SELECT_DEFAULTS)
    if not cfg["data"]:
        raise CliError("--data is required")
    if not cfg["method"]:
        raise CliError(f"--method is required; valid names: {', '.join(METHODS)}")
    try:
        method = get_method(cfg["method"])
    except ValueError as exc:
        raise CliError(str(exc)) from None
    data = load_csv(cfg["data"], cfg["label"])
    seed = cfg["seed"]
    result = select(
        data, method, cfg["top_k"],
        forest_params=_forest(cfg, derive_seed(seed, "relevance-forest")),
        rdc_params=_rdc(cfg, derive_seed(seed, "rdc")),
        bins=cfg["bins"],
    )
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "ranking.json"), "w") as fh:
        json.dump(result.to_dict(data.names), fh, indent=2)
        fh.write("\n")
    if cfg["heatmap"]:
        mat, labels = redundancy_heatmap(data, result.ranked)
        with open(os.path.join(args.out, "heatmap.csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([""] + labels)
            for lab, row in zip(labels, mat.tolist()):
                w.writerow([lab] + [repr(v) for v in row])
    _write_manifest(args.out, "select", cfg, [cfg["data"]], started)
    print(f"{method.name}: " + ", ".join(data.names[i] for i in result.ranked))
    return 0


def cmd_benchmark(args: argparse.Namespace) -> int:
    started = _now()
    cfg = _resolve(args, BENCH_DEFAULTS)
    if bool(cfg["data"]) == bool(cfg["synthetic"]):
        raise CliError("give exactly one of --data or --synthetic")
    try:
        config = EvalConfig(
            methods=tuple(cfg["methods"]),
            classifiers=tuple(cfg["classifiers"]),
            top_k=cfg["top_k"],
            feature_counts=None if cfg["feature_counts"] is None else tuple(cfg["feature_counts"]),
            folds=cfg["folds"],
            trials=cfg["trials"],
            train_fraction=cfg["train_fraction"],
            seed=cfg["seed"],
            forest=_forest(cfg, 0),
            rdc=_rdc(cfg, 0),
            bins=cfg["bins"],
            include_all_features=cfg["all_features"],
            choose_n=cfg["choose_n"],
            choose_n_max=cfg["choose_n_max"],
            choose_n_tolerance=cfg["choose_n_tolerance"],
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None
    inputs = []
    if cfg["data"]:
        source = load_csv(cfg["data"], cfg["label"])
        inputs.append(cfg["data"])
    else:
        source = _spec(cfg)
    workers = args.workers if args.workers else (os.cpu_count() or 1)
    report = run_benchmark(source, config, workers=workers)
    write_report(report, args.out)
    _write_manifest(args.out, "benchmark", cfg, inputs, started)
    failed = sum(c.failed for c in report.cells.values())
    print(f"{len(report.cells)} cells written to {args.out} ({failed} failed)")
    if report.chosen_n:
        for m, n in report.chosen_n.items():
            print(f"chosen n for {m}: {n}")
    return 0


# ------------------------------------------------------------ parser

def _add_synth_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, help="rows to generate")
    p.add_argument("--n-informative", type=int)
    p.add_argument("--n-linear-redundant", type=int)
    p.add_argument("--n-nonlinear-redundant", type=int)
    p.add_argument("--n-irrelevant", type=int)
    p.add_argument("--error-sd", type=float)
    p.add_argument("--n-splines", type=int)


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-trees", type=int)
    p.add_argument("--max-depth", type=int)
    p.add_argument("--min-samples-leaf", type=int)
    p.add_argument("--max-features", choices=["sqrt", "log2", "all"])
    p.add_argument("--rdc-k", type=int)
    p.add_argument("--rdc-s", type=float)
    p.add_argument("--rdc-repetitions", type=int)
    p.add_argument("--bins", type=int, help="quantile bins for mutual information")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mrmrfs", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the synthetic benchmark dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    _add_synth_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("select", help="rank features with one method")
    p.add_argument("--out", required=True)
    p.add_argument("--data", help="CSV file with a header row")
    p.add_argument("--label", help="label column name (default y)")
    p.add_argument("--method", help=f"one of {', '.join(METHODS)}")
    p.add_argument("--top-k", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--heatmap", action="store_const", const=True,
                   help="also write the Pearson heatmap of the ranked features")
    p.add_argument("--config")
    _add_model_flags(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("benchmark", help="run the method x classifier x feature-count grid")
    p.add_argument("--out", required=True)
    p.add_argument("--data")
    p.add_argument("--label")
    p.add_argument("--synthetic", action="store_const", const=True,
                   help="generate fresh synthetic data per trial")
    _add_synth_flags(p)
    p.add_argument("--methods", type=_csv_list)
    p.add_argument("--classifiers", type=_csv_list)
    p.add_argument("--top-k", type=int)
    p.add_argument("--feature-counts", type=_counts, help='e.g. "1-20" or "5,10,15"')
    p.add_argument("--folds", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--train-fraction", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--no-all-features", dest="all_features", action="store_const", const=False)
    p.add_argument("--choose-n", action="store_const", const=True)
    p.add_argument("--choose-n-max", type=int)
    p.add_argument("--choose-n-tolerance", type=float)
    p.add_argument("--workers", type=int, help="process count for classifier fitting")
    p.add_argument("--config")
    _add_model_flags(p)
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, DatasetError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
