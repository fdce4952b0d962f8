"""Benchmark harness: rank features per method, then score classifiers on the top-n.

For a :class:`~mrmrfs.dataset.Dataset` source the rows are split with k-fold
cross-validation. For a :class:`~mrmrfs.synth.SyntheticSpec` source every
trial generates a fresh dataset and splits it once into train and test.

Seeds are derived from ``EvalConfig.seed``:

* k-fold assignment: ``derive_seed(seed, "kfold")``
* trial t data: ``derive_seed(seed, "trial", t)``; its split:
  ``derive_seed(seed, "split", t)``
* fold/trial f relevance forest: ``derive_seed(seed, "relevance-forest", f)``
* fold/trial f RDC projections: ``derive_seed(seed, "rdc", f)``
* fold/trial f random-forest classifier: ``derive_seed(seed, "classifier-forest", f)``
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from mrmrfs import measures
from mrmrfs._seeding import derive_seed
from mrmrfs.classifiers import CLASSIFIERS, fit_classifier
from mrmrfs.dataset import Dataset, kfold, split
from mrmrfs.forest import ForestParams, train_forest_arrays
from mrmrfs.metrics import auc, f1
from mrmrfs.selector import METHODS, get_method, select
from mrmrfs.synth import SyntheticSpec, generate

log = logging.getLogger(__name__)

ALL_FEATURES = "ALL"
REPORT_VERSION = 1


@dataclass(frozen=True)
class EvalConfig:
    methods: tuple[str, ...] = tuple(METHODS)
    classifiers: tuple[str, ...] = CLASSIFIERS
    top_k: int = 20
    feature_counts: tuple[int, ...] | None = None
    folds: int = 4
    trials: int = 10
    train_fraction: float = 0.5
    seed: int = 0
    forest: ForestParams = field(default_factory=ForestParams)
    rdc: measures.RdcParams = field(default_factory=measures.RdcParams)
    bins: int = measures.DEFAULT_BINS
    include_all_features: bool = True
    choose_n: bool = False
    choose_n_max: int = 50
    choose_n_tolerance: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(get_method(m).name for m in self.methods))
        for c in self.classifiers:
            if c not in CLASSIFIERS:
                raise ValueError(f"unknown classifier {c!r}; valid: {', '.join(CLASSIFIERS)}")
        object.__setattr__(self, "classifiers", tuple(self.classifiers))
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        counts = self.feature_counts
        counts = tuple(range(1, self.top_k + 1)) if counts is None else tuple(int(c) for c in counts)
        if any(c < 1 or c > self.top_k for c in counts):
            raise ValueError(f"feature_counts must lie in [1, top_k={self.top_k}]")
        object.__setattr__(self, "feature_counts", counts)
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for k in ("methods", "classifiers", "feature_counts"):
            d[k] = list(d[k])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EvalConfig":
        d = dict(d)
        if "forest" in d and isinstance(d["forest"], dict):
            d["forest"] = ForestParams(**d["forest"])
        if "rdc" in d and isinstance(d["rdc"], dict):
            d["rdc"] = measures.RdcParams(**d["rdc"])
        for k in ("methods", "classifiers", "feature_counts"):
            if d.get(k) is not None:
                d[k] = tuple(d[k])
        return cls(**d)


@dataclass
class Cell:
    method: str
    classifier: str
    n_features: int
    auc: list[float] = field(default_factory=list)
    f1: list[float] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return bool(self.errors)

    def summary(self) -> dict:
        ok = not self.failed and bool(self.auc)
        return {
            "method": self.method,
            "classifier": self.classifier,
            "n_features": self.n_features,
            "auc_mean": float(np.mean(self.auc)) if ok else None,
            "f1_mean": float(np.mean(self.f1)) if ok else None,
            # extra: spread across folds/trials
            "auc_std": float(np.std(self.auc)) if ok else None,
            "f1_std": float(np.std(self.f1)) if ok else None,
            "n_runs": len(self.auc),
            "failed": self.failed,
            "errors": list(self.errors),
        }


@dataclass
class EvalReport:
    config: EvalConfig
    cells: dict[tuple[str, str, int], Cell]
    timings: dict[str, list[float]]
    ranked_features: dict[str, list[list[int] | None]]
    fingerprints: list[str]
    source: dict
    chosen_n: dict[str, int] = field(default_factory=dict)

    def cell(self, method: str, classifier: str, n_features: int) -> dict:
        return self.cells[(method, classifier, n_features)].summary()

    def timing_summary(self) -> dict:
        return {m: {"mean_seconds": float(np.mean(t)) if t else None, "per_run": list(t)}
                for m, t in self.timings.items()}

    def to_dict(self, include_timings: bool = True) -> dict:
        d = {
            "version": REPORT_VERSION,
            "config": self.config.to_dict(),
            "source": self.source,
            "dataset_fingerprints": list(self.fingerprints),
            "cells": [c.summary() for c in self.cells.values()],
            "ranked_features": self.ranked_features,
        }
        if self.config.choose_n:
            d["chosen_n"] = self.chosen_n
        if include_timings:
            d["timings"] = self.timing_summary()
        return d

    def cells_csv(self) -> str:
        buf = io.StringIO()
        cols = ["method", "classifier", "n_features", "auc_mean", "f1_mean", "auc_std", "f1_std",
                "n_runs", "failed"]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for c in self.cells.values():
            s = c.summary()
            w.writerow(["" if s[k] is None else (repr(s[k]) if isinstance(s[k], float) else s[k])
                        for k in cols])
        return buf.getvalue()


def fingerprint(data: Dataset) -> str:
    h = hashlib.sha256()
    h.update("\x1f".join(data.names).encode())
    h.update(np.ascontiguousarray(data.features).tobytes())
    h.update(np.ascontiguousarray(data.labels).tobytes())
    return h.hexdigest()


# ------------------------------------------------------------ per-cell work

def _score_classifier(classifier: str, method: str, ranked: list[int] | None, counts,
                      train_x, train_y, test_x, test_y, forest_params: ForestParams):
    """Return [(n_features, auc, f1 | None, error | None)] for one classifier and method."""
    out = []
    for n in counts:
        if ranked is None:
            out.append((n, None, None, "ranking failed"))
            continue
        if n > len(ranked):
            out.append((n, None, None, f"only {len(ranked)} features ranked"))
            continue
        cols = list(ranked[:n])
        try:
            model = fit_classifier(classifier, train_x[:, cols], train_y, forest_params)
            prob = model.predict_proba(test_x[:, cols])
            out.append((n, auc(prob, test_y), f1(prob, test_y), None))
        except Exception as exc:  # a failing cell must not stop the run
            log.warning("%s/%s/%d failed: %s", method, classifier, n, exc)
            out.append((n, None, None, f"{type(exc).__name__}: {exc}"))
    return classifier, method, out


def _run_task(args):
    return _score_classifier(*args)


# ------------------------------------------------------------ splits

def _splits(source, config: EvalConfig):
    """Yield (run index, train, test, fingerprint-of-source-data)."""
    if isinstance(source, Dataset):
        folds = kfold(source, config.folds, derive_seed(config.seed, "kfold"))
        fp = fingerprint(source)
        for f in range(config.folds):
            yield f, source.take_rows(folds.train_rows(f)), source.take_rows(folds.test_rows(f)), fp
    elif isinstance(source, SyntheticSpec):
        for t in range(config.trials):
            spec = dataclasses.replace(source, seed=derive_seed(config.seed, "trial", t))
            data, _ = generate(spec)
            train, test = split(data, config.train_fraction, derive_seed(config.seed, "split", t))
            yield t, train, test, fingerprint(data)
    else:
        raise TypeError(f"unsupported data source {type(source).__name__}")


def run_benchmark(source: Dataset | SyntheticSpec, config: EvalConfig | None = None,
                  workers: int = 1) -> EvalReport:
    """Evaluate every (method, classifier, feature count) cell.

    Ranking (the timed part) always runs in this process, one method at a
    time. With ``workers > 1`` the classifier cells of each fold are fitted in
    a process pool after that fold's rankings are done.
    """
    config = config or EvalConfig()
    methods = list(config.methods)
    cells: dict[tuple[str, str, int], Cell] = {}
    for meth in methods:
        for clf in config.classifiers:
            for n in config.feature_counts:
                cells[(meth, clf, n)] = Cell(meth, clf, n)
    timings: dict[str, list[float]] = {m: [] for m in methods}
    ranked_features: dict[str, list] = {m: [] for m in methods}
    fingerprints: list[str] = []
    chosen: dict[str, int] = {}
    all_n = None

    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for run, train, test, fp in _splits(source, config):
            if run == 0 or isinstance(source, SyntheticSpec):
                fingerprints.append(fp)
            if config.top_k > train.m:
                raise ValueError(f"top_k={config.top_k} exceeds the {train.m} available features")
            rel_forest = dataclasses.replace(config.forest,
                                             seed=derive_seed(config.seed, "relevance-forest", run))
            rdc_params = dataclasses.replace(config.rdc, seed=derive_seed(config.seed, "rdc", run))
            clf_forest = dataclasses.replace(config.forest,
                                             seed=derive_seed(config.seed, "classifier-forest", run))
            rankings: dict[str, list[int] | None] = {}
            for meth in methods:
                t0 = time.perf_counter()
                try:
                    res = select(train, meth, config.top_k, rel_forest, rdc_params, bins=config.bins)
                    rankings[meth] = res.ranked
                    timings[meth].append(time.perf_counter() - t0)
                except Exception as exc:
                    log.warning("method %s failed on run %d: %s", meth, run, exc)
                    rankings[meth] = None
                    for clf in config.classifiers:
                        for n in config.feature_counts:
                            cells[(meth, clf, n)].errors.append(f"run {run}: {type(exc).__name__}: {exc}")
                ranked_features[meth].append(rankings[meth])

            tasks = []
            for clf in config.classifiers:
                for meth in methods:
                    if rankings[meth] is None:
                        continue
                    tasks.append((clf, meth, rankings[meth], config.feature_counts,
                                  train.features, train.labels, test.features, test.labels, clf_forest))
                if config.include_all_features:
                    all_n = train.m
                    tasks.append((clf, ALL_FEATURES, list(range(train.m)), (train.m,),
                                  train.features, train.labels, test.features, test.labels, clf_forest))
            results = pool.map(_run_task, tasks) if pool else map(_run_task, tasks)
            for clf, meth, scored in results:
                for n, a, f, err in scored:
                    cell = cells.setdefault((meth, clf, n), Cell(meth, clf, n))
                    if err is not None:
                        cell.errors.append(f"run {run}: {err}")
                    else:
                        cell.auc.append(a)
                        cell.f1.append(f)

            if config.choose_n and run == 0:
                for meth in methods:
                    if rankings[meth]:
                        chosen[meth] = choose_num_features(
                            train, rankings[meth], config.choose_n_max, clf_forest,
                            tolerance=config.choose_n_tolerance,
                            seed=derive_seed(config.seed, "choose-n"),
                        )
    finally:
        if pool is not None:
            pool.shutdown()

    if isinstance(source, Dataset):
        src = {"kind": "dataset", "n": source.n, "m": source.m}
    else:
        src = {"kind": "synthetic", "spec": source.to_dict()}
    if all_n is not None:
        src["all_features_n"] = all_n
    return EvalReport(config, cells, timings, ranked_features, fingerprints, src, chosen)


# ------------------------------------------------------------ choosing n

def smallest_n_within(aucs, tolerance: float = 0.0) -> int:
    """1-based position of the first AUC within ``tolerance`` of the maximum."""
    aucs = list(aucs)
    if not aucs:
        raise ValueError("empty AUC sequence")
    best = max(aucs)
    for i, a in enumerate(aucs, start=1):
        if a >= best - tolerance - 1e-12:
            return i
    raise AssertionError("unreachable")


def feature_count_curve(data: Dataset, ranked, max_n: int = 50,
                        params: ForestParams | None = None, train_fraction: float = 0.5,
                        seed: int = 0) -> list[float]:
    """Held-out random-forest AUC for the top-1 .. top-N ranked features."""
    ranked = list(ranked)
    if not ranked:
        raise ValueError("ranked feature list is empty")
    params = params or ForestParams()
    train, test = split(data, train_fraction, seed)
    aucs = []
    for n in range(1, min(max_n, len(ranked)) + 1):
        cols = ranked[:n]
        model = train_forest_arrays(train.features[:, cols], train.labels, params)
        aucs.append(auc(model.predict_proba(test.features[:, cols]), test.labels))
    return aucs


def choose_num_features(data: Dataset, ranked, max_n: int = 50, params: ForestParams | None = None,
                        tolerance: float = 0.0, train_fraction: float = 0.5, seed: int = 0) -> int:
    """Smallest n whose held-out AUC is within ``tolerance`` of the best over n = 1..max_n."""
    aucs = feature_count_curve(data, ranked, max_n, params, train_fraction, seed)
    return smallest_n_within(aucs, tolerance)


# ------------------------------------------------------------ output

REPORT_FILE = "report.json"
CELLS_FILE = "cells.csv"
TIMINGS_FILE = "timings.json"


def write_report(report: EvalReport, directory: str | os.PathLike) -> list[str]:
    """Write ``report.json`` and ``cells.csv`` (deterministic) plus ``timings.json``.

    Wall-clock timings live in their own file so that the first two are
    byte-identical across reruns of the same configuration.
    """
    os.makedirs(directory, exist_ok=True)
    paths = [os.path.join(directory, f) for f in (REPORT_FILE, CELLS_FILE, TIMINGS_FILE)]
    with open(paths[0], "w") as fh:
        json.dump(report.to_dict(include_timings=False), fh, indent=2)
        fh.write("\n")
    with open(paths[1], "w", newline="") as fh:
        fh.write(report.cells_csv())
    with open(paths[2], "w") as fh:
        json.dump(report.timing_summary(), fh, indent=2)
        fh.write("\n")
    return paths
