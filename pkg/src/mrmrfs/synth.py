"""Synthetic classification benchmark with known feature groups.

Columns come in four groups, in this order:

* informative: ``x_j = f(z_j)`` for latent ``z_j ~ N(0, 1)`` and a spline
  ``f`` picked at random from a pool;
* linear redundant: a random-weight linear combination of a random subset
  of informative columns;
* nonlinear redundant: a pool spline applied to such a linear combination;
* irrelevant: independent ``N(0, 1)`` noise.

Labels come from a logistic model on the latent columns,
``p_i = sigmoid(sum_j (z_ij * beta_j + e_ij))`` with ``beta_j ~ U(-1, 1)`` and
``e_ij ~ N(0, error_sd**2)``, and ``y_i = 1`` iff ``p_i >= 0.5``.

Randomness: every stage draws from its own generator,
``make_rng(seed, <stage>)`` with stages ``"latent"`` (z, then beta, then e),
``"spline"`` (one generator per pool member, keyed by its index),
``"assign"`` (spline ids for informative then nonlinear columns),
``"mix"`` (per redundant column: subset size, subset, weights) and
``"irrelevant"``.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

import numpy as np

from mrmrfs._seeding import make_rng
from mrmrfs.dataset import Dataset, write_dataset_csv
from mrmrfs.spline import Spline, random_spline

METADATA_VERSION = 1
GROUPS = ("informative", "linear_redundant", "nonlinear_redundant", "irrelevant")
_PREFIX = {"informative": "inf", "linear_redundant": "lin",
           "nonlinear_redundant": "nl", "irrelevant": "irr"}


@dataclass(frozen=True)
class SyntheticSpec:
    n: int = 100_000
    n_informative: int = 10
    n_linear_redundant: int = 20
    n_nonlinear_redundant: int = 20
    n_irrelevant: int = 20
    error_sd: float = 0.1
    n_splines: int = 10
    spline_knots: int = 10
    knot_range: tuple[float, float] = (-3.0, 3.0)
    max_parents: int = 10
    seed: int = 0

    def __post_init__(self):
        counts = (self.n_informative, self.n_linear_redundant,
                  self.n_nonlinear_redundant, self.n_irrelevant)
        if any(c < 0 for c in counts):
            raise ValueError("feature group counts must be >= 0")
        if sum(counts) == 0:
            raise ValueError("spec produces no features")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.n_informative == 0 and (self.n_linear_redundant or self.n_nonlinear_redundant):
            raise ValueError("redundant features need at least one informative feature")
        if self.n_splines < 1 or self.spline_knots < 2 or self.max_parents < 1:
            raise ValueError("n_splines >= 1, spline_knots >= 2 and max_parents >= 1 required")
        if self.error_sd < 0:
            raise ValueError("error_sd must be >= 0")
        object.__setattr__(self, "knot_range", tuple(float(v) for v in self.knot_range))

    @property
    def n_features(self) -> int:
        return (self.n_informative + self.n_linear_redundant
                + self.n_nonlinear_redundant + self.n_irrelevant)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["knot_range"] = list(self.knot_range)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticSpec":
        d = dict(d)
        if "knot_range" in d:
            d["knot_range"] = tuple(d["knot_range"])
        return cls(**d)


@dataclass(frozen=True, eq=False)
class SyntheticGroundTruth:
    z: np.ndarray
    beta: np.ndarray
    e: np.ndarray
    p: np.ndarray
    group_of_feature: tuple[str, ...]
    parents: tuple[tuple[int, ...] | None, ...]
    weights: tuple[tuple[float, ...] | None, ...]
    spline_of_feature: tuple[int | None, ...]
    splines: tuple[Spline, ...]
    spec: SyntheticSpec = field(default_factory=SyntheticSpec)

    def indices(self, group: str) -> list[int]:
        return [j for j, g in enumerate(self.group_of_feature) if g == group]

    def metadata(self) -> dict:
        columns = []
        names = column_names(self.spec)
        for j, g in enumerate(self.group_of_feature):
            columns.append({
                "name": names[j],
                "group": g,
                "parents": None if self.parents[j] is None else list(self.parents[j]),
                "weights": None if self.weights[j] is None else list(self.weights[j]),
                "spline_id": self.spline_of_feature[j],
            })
        return {
            "version": METADATA_VERSION,
            "seed": self.spec.seed,
            "spec": self.spec.to_dict(),
            "beta": self.beta.tolist(),
            "splines": [{"knots": s.knots.tolist(), "values": s.values.tolist()}
                        for s in self.splines],
            "columns": columns,
        }


def column_names(spec: SyntheticSpec) -> tuple[str, ...]:
    counts = (spec.n_informative, spec.n_linear_redundant,
              spec.n_nonlinear_redundant, spec.n_irrelevant)
    names = []
    for g, c in zip(GROUPS, counts):
        names.extend(f"{_PREFIX[g]}{i:02d}" for i in range(c))
    return tuple(names)


def logistic_probability(z: np.ndarray, beta: np.ndarray, e: np.ndarray) -> np.ndarray:
    logit = np.sum(z * beta + e, axis=1)
    return 1.0 / (1.0 + np.exp(-logit))


def _mix(rng: np.random.Generator, informative: np.ndarray, max_parents: int):
    k = informative.shape[1]
    size = int(rng.integers(1, min(max_parents, k) + 1))
    parents = np.sort(rng.choice(k, size=size, replace=False))
    w = rng.standard_normal(size)
    return tuple(int(p) for p in parents), tuple(float(v) for v in w), informative[:, parents] @ w


def generate(spec: SyntheticSpec) -> tuple[Dataset, SyntheticGroundTruth]:
    n, k = spec.n, spec.n_informative
    latent = make_rng(spec.seed, "latent")
    z = latent.standard_normal((n, k))
    beta = latent.uniform(-1.0, 1.0, size=k)
    e = latent.normal(0.0, spec.error_sd, size=(n, k))
    p = logistic_probability(z, beta, e)
    y = (p >= 0.5).astype(np.int64)

    pool = tuple(
        random_spline(make_rng(spec.seed, "spline", s), spec.spline_knots, spec.knot_range)
        for s in range(spec.n_splines)
    )
    assign = make_rng(spec.seed, "assign")
    inf_ids = assign.integers(0, spec.n_splines, size=k)
    nl_ids = assign.integers(0, spec.n_splines, size=spec.n_nonlinear_redundant)

    cols, groups, parents, weights, spline_ids = [], [], [], [], []
    informative = np.empty((n, k))
    for j in range(k):
        informative[:, j] = pool[inf_ids[j]](z[:, j])
        cols.append(informative[:, j])
        groups.append("informative")
        parents.append(None)
        weights.append(None)
        spline_ids.append(int(inf_ids[j]))

    mix = make_rng(spec.seed, "mix")
    for _ in range(spec.n_linear_redundant):
        par, w, col = _mix(mix, informative, spec.max_parents)
        cols.append(col)
        groups.append("linear_redundant")
        parents.append(par)
        weights.append(w)
        spline_ids.append(None)
    for j in range(spec.n_nonlinear_redundant):
        par, w, inter = _mix(mix, informative, spec.max_parents)
        cols.append(pool[nl_ids[j]](inter))
        groups.append("nonlinear_redundant")
        parents.append(par)
        weights.append(w)
        spline_ids.append(int(nl_ids[j]))

    noise = make_rng(spec.seed, "irrelevant").standard_normal((n, spec.n_irrelevant))
    for j in range(spec.n_irrelevant):
        cols.append(noise[:, j])
        groups.append("irrelevant")
        parents.append(None)
        weights.append(None)
        spline_ids.append(None)

    x = np.column_stack(cols)
    data = Dataset(x, y, column_names(spec))
    truth = SyntheticGroundTruth(
        z=z, beta=beta, e=e, p=p,
        group_of_feature=tuple(groups),
        parents=tuple(parents),
        weights=tuple(weights),
        spline_of_feature=tuple(spline_ids),
        splines=pool,
        spec=spec,
    )
    return data, truth


DATA_FILE = "data.csv"
METADATA_FILE = "metadata.json"
LABEL_COLUMN = "y"


def write_csv(data: Dataset, truth: SyntheticGroundTruth, directory: str | os.PathLike) -> tuple[str, str]:
    """Write ``data.csv`` (features then label ``y``) and ``metadata.json``."""
    os.makedirs(directory, exist_ok=True)
    data_path = os.path.join(directory, DATA_FILE)
    meta_path = os.path.join(directory, METADATA_FILE)
    write_dataset_csv(data, data_path, LABEL_COLUMN)
    with open(meta_path, "w") as fh:
        json.dump(truth.metadata(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return data_path, meta_path
