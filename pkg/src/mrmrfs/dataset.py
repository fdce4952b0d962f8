"""Tabular numeric data with a binary class label.

Row shuffles (``kfold`` and ``split``) use ``numpy.random.default_rng(seed)``,
i.e. the PCG64 bit generator, and its ``permutation`` method. Both are stable
across numpy releases on all platforms, so a seed pins the partition.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class DatasetError(ValueError):
    """Raised when tabular input violates the dataset contract."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix (n rows, m columns), 0/1 labels and unique column names.

    The matrix is held in Fortran (column-major) order so ``column(j)`` is a
    contiguous view. Arrays are made read-only on construction.
    """

    features: np.ndarray
    labels: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        x = np.asfortranarray(np.asarray(self.features, dtype=np.float64))
        if x.ndim != 2:
            raise DatasetError(f"features must be 2-D, got shape {x.shape}")
        y = np.asarray(self.labels)
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise DatasetError(
                f"labels must be a vector of length {x.shape[0]}, got shape {y.shape}"
            )
        if x.shape[0] == 0:
            raise DatasetError("dataset has no rows")
        if not np.all(np.isfinite(x)):
            raise DatasetError("features contain NaN or infinite values")
        if not np.all((y == 0) | (y == 1)):
            raise DatasetError("label value outside {0,1}")
        y = y.astype(np.int64)
        if not 0 < int(y.sum()) < y.shape[0]:
            raise DatasetError("labels must contain at least one 0 and one 1")
        names = tuple(str(s) for s in self.names)
        if len(names) != x.shape[1]:
            raise DatasetError(f"expected {x.shape[1]} names, got {len(names)}")
        if any(not s for s in names):
            raise DatasetError("feature names must be non-empty")
        if len(set(names)) != len(names):
            raise DatasetError("feature names must be unique")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def m(self) -> int:
        return self.features.shape[1]

    def column(self, j: int) -> np.ndarray:
        return self.features[:, j]

    def take_rows(self, rows: Sequence[int] | np.ndarray) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(self.features[rows], self.labels[rows], self.names)

    def take_columns(self, cols: Sequence[int] | np.ndarray) -> "Dataset":
        cols = [int(c) for c in cols]
        return Dataset(self.features[:, cols], self.labels, tuple(self.names[c] for c in cols))

    def equals(self, other: "Dataset") -> bool:
        """Exact value-for-value equality."""
        return (
            self.names == other.names
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
        )


@dataclass(frozen=True)
class FoldAssignment:
    fold_of_row: np.ndarray
    k: int
    seed: int = field(default=0)

    def test_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of_row == fold)

    def train_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of_row != fold)

    def sizes(self) -> list[int]:
        return np.bincount(self.fold_of_row, minlength=self.k).tolist()


def _parse_float(text: str) -> float:
    value = float(text)
    if not np.isfinite(value):
        raise ValueError(text)
    return value


def load_csv(path: str | os.PathLike, label_column: str) -> Dataset:
    """Read a comma-separated file with a header row into a :class:`Dataset`.

    Every cell must parse as a finite number. The label column is removed
    from the features; remaining column order and row order are kept.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise DatasetError(f"no such file: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetError(f"{path}: empty file, header row expected") from None
        if label_column not in header:
            raise DatasetError(f"{path}: label column {label_column!r} not found in header")
        width = len(header)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise DatasetError(
                    f"{path}: row {lineno} has {len(row)} cells, header has {width}"
                )
            try:
                rows.append([_parse_float(c) for c in row])
            except ValueError:
                for col, cell in zip(header, row):
                    try:
                        _parse_float(cell)
                    except ValueError:
                        raise DatasetError(
                            f"{path}: non-numeric cell {cell!r} at row {lineno}, column {col!r}"
                        ) from None
                raise
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    table = np.array(rows, dtype=np.float64)
    li = header.index(label_column)
    y = table[:, li]
    if not np.all((y == 0) | (y == 1)):
        bad = int(np.flatnonzero((y != 0) & (y != 1))[0])
        raise DatasetError(
            f"{path}: label value outside {{0,1}} at row {bad + 2}: {y[bad]!r}"
        )
    keep = [j for j in range(width) if j != li]
    return Dataset(table[:, keep], y.astype(np.int64), tuple(header[j] for j in keep))


def write_dataset_csv(data: Dataset, path: str | os.PathLike, label_column: str = "y") -> None:
    """Write features and label; floats use 17 significant digits so reload is exact."""
    if label_column in data.names:
        raise DatasetError(f"label column name {label_column!r} collides with a feature")
    with open(path, "w", newline="") as fh:
        fh.write(",".join(data.names + (label_column,)) + "\n")
        x = data.features
        y = data.labels
        for i in range(data.n):
            cells = ["%.17g" % v for v in x[i].tolist()]
            cells.append(str(int(y[i])))
            fh.write(",".join(cells) + "\n")


def kfold(data: Dataset, k: int, seed: int) -> FoldAssignment:
    """Shuffle rows and deal them into ``k`` folds; the first ``n % k`` folds get one extra row."""
    n = data.n
    if k < 2:
        raise DatasetError(f"k must be at least 2, got {k}")
    if n < k:
        raise DatasetError(f"cannot make {k} folds from {n} rows")
    perm = np.random.default_rng(seed).permutation(n)
    base, extra = divmod(n, k)
    sizes = [base + (1 if f < extra else 0) for f in range(k)]
    fold_of_row = np.empty(n, dtype=np.int64)
    fold_of_row[perm] = np.repeat(np.arange(k), sizes)
    return FoldAssignment(fold_of_row, k, seed)


def split_rows(n: int, train_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Row indices (sorted) for a random train/test partition.

    The training side gets ``floor(n * train_fraction + 0.5)`` rows.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DatasetError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n_train = int(np.floor(n * train_fraction + 0.5))
    if n_train == 0 or n_train == n:
        raise DatasetError(
            f"split of {n} rows at fraction {train_fraction} leaves one side empty"
        )
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def split(data: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    train, test = split_rows(data.n, train_fraction, seed)
    return data.take_rows(train), data.take_rows(test)
