"""Tabular datasets, feature groups and reproducible row splits."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class DataError(ValueError):
    """Raised for malformed input data (bad CSV cells, wrong shapes, bad indices)."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Numeric feature matrix with a designated real-valued target.

    ``X`` has shape ``(n_rows, n_features)``; column ``k`` is the feature
    ``feature_names[k]``. Arrays are made read-only on construction.
    """

    feature_names: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        names = tuple(self.feature_names)
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64).reshape(-1)
        if X.ndim != 2:
            X = X.reshape(len(y), -1)
        if X.shape[0] != y.shape[0]:
            raise DataError(f"X has {X.shape[0]} rows but target has {y.shape[0]}")
        if X.shape[1] != len(names):
            raise DataError(f"{len(names)} feature names for {X.shape[1]} columns")
        if any(not isinstance(n, str) or not n for n in names):
            raise DataError("feature names must be non-empty strings")
        if len(set(names)) != len(names):
            raise DataError("feature names must be unique")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise DataError("non-finite values are not allowed")
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "y", _frozen(y))

    @property
    def n_rows(self) -> int:
        return self.y.shape[0]

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.X[:, self.feature_names.index(name)]
        except ValueError:
            raise DataError(f"no feature named {name!r}") from None

    def index_of(self, names: Iterable[str]) -> list[int]:
        out = []
        for n in names:
            if n not in self.feature_names:
                raise DataError(f"no feature named {n!r}")
            out.append(self.feature_names.index(n))
        return out

    def rows(self, idx) -> "Dataset":
        """Row subset (features and target), keeping column order."""
        idx = np.asarray(idx, dtype=np.intp)
        return Dataset(self.feature_names, self.X[idx], self.y[idx])

    def with_target(self, y) -> "Dataset":
        return Dataset(self.feature_names, self.X, y)

    def __repr__(self):
        return f"Dataset(n_rows={self.n_rows}, features={list(self.feature_names)})"


@dataclass(frozen=True)
class GroupSpec:
    """Two disjoint, non-empty feature groups covering all features."""

    group_j: frozenset[int]
    group_jbar: frozenset[int]

    def __post_init__(self):
        j, jbar = frozenset(self.group_j), frozenset(self.group_jbar)
        if not j or not jbar:
            raise DataError("both feature groups must be non-empty")
        if j & jbar:
            raise DataError(f"groups overlap on {sorted(j & jbar)}")
        object.__setattr__(self, "group_j", j)
        object.__setattr__(self, "group_jbar", jbar)

    @classmethod
    def complement(cls, group_j: Iterable[int], n_features: int) -> "GroupSpec":
        j = frozenset(int(i) for i in group_j)
        bad = [i for i in j if not 0 <= i < n_features]
        if bad:
            raise DataError(f"feature indices out of range: {sorted(bad)}")
        return cls(j, frozenset(range(n_features)) - j)

    @property
    def all_features(self) -> frozenset[int]:
        return self.group_j | self.group_jbar

    def swapped(self) -> "GroupSpec":
        return GroupSpec(self.group_jbar, self.group_j)

    def validate(self, n_features: int):
        if self.all_features != frozenset(range(n_features)):
            raise DataError(
                f"groups must partition the {n_features} features, got "
                f"{sorted(self.group_j)} | {sorted(self.group_jbar)}"
            )


@dataclass(frozen=True)
class SplitPlan:
    train_idx: np.ndarray
    test_idx: np.ndarray
    seed: int

    def __post_init__(self):
        tr = np.sort(np.asarray(self.train_idx, dtype=np.intp))
        te = np.sort(np.asarray(self.test_idx, dtype=np.intp))
        if np.intersect1d(tr, te).size:
            raise DataError("train and test indices overlap")
        tr.setflags(write=False)
        te.setflags(write=False)
        object.__setattr__(self, "train_idx", tr)
        object.__setattr__(self, "test_idx", te)


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple[SplitPlan, ...]
    k: int
    seed: int

    def __iter__(self):
        return iter(self.folds)

    def __len__(self):
        return len(self.folds)


def load_csv(path, target_name: str, categorical: Sequence[str] = ()) -> Dataset:
    """Read a headed, comma-separated file into a :class:`Dataset`.

    Columns listed in ``categorical`` are mapped to integer codes ``0..K-1``
    in order of first appearance. Every other cell must parse as a finite
    float; blank, unparseable or non-finite cells raise :class:`DataError`
    naming the row (1-based, header excluded) and the column.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such data file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if target_name not in header:
            raise DataError(f"{path}: target column {target_name!r} not in header")
        unknown = set(categorical) - set(header)
        if unknown:
            raise DataError(f"{path}: categorical columns not in header: {sorted(unknown)}")
        codes: dict[str, dict[str, int]] = {c: {} for c in categorical}
        rows = []
        for lineno, rec in enumerate(reader, start=1):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise DataError(f"{path}: row {lineno} has {len(rec)} cells, expected {len(header)}")
            vals = []
            for name, cell in zip(header, rec):
                cell = cell.strip()
                if name in codes:
                    if not cell:
                        raise DataError(f"{path}: blank cell at row {lineno}, column {name!r}")
                    vals.append(float(codes[name].setdefault(cell, len(codes[name]))))
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    what = "blank" if not cell else f"unparseable ({cell!r})"
                    raise DataError(f"{path}: {what} cell at row {lineno}, column {name!r}") from None
                if not math.isfinite(v):
                    raise DataError(f"{path}: non-finite cell at row {lineno}, column {name!r}")
                vals.append(v)
            rows.append(vals)
    if not rows:
        raise DataError(f"{path}: no data rows")
    table = np.array(rows, dtype=np.float64)
    t = header.index(target_name)
    feats = [i for i in range(len(header)) if i != t]
    return Dataset(tuple(header[i] for i in feats), table[:, feats], table[:, t])


def write_csv(dataset: Dataset, path, target_name: str = "y"):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([*dataset.feature_names, target_name])
        for x, y in zip(dataset.X, dataset.y):
            w.writerow([repr(float(v)) for v in x] + [repr(float(y))])


def holdout_split(n_rows: int, test_fraction: float = 0.2, seed: int = 0) -> SplitPlan:
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    n_test = int(round(test_fraction * n_rows))
    if n_rows < 2 or n_test < 1 or n_test >= n_rows:
        raise DataError(f"cannot hold out {test_fraction} of {n_rows} rows")
    perm = np.random.default_rng(seed).permutation(n_rows)
    return SplitPlan(train_idx=perm[n_test:], test_idx=perm[:n_test], seed=seed)


def kfold_split(n_rows: int, k: int = 10, seed: int = 0) -> FoldPlan:
    """Shuffled, unstratified k-fold plan; fold sizes differ by at most one."""
    if not 2 <= k <= n_rows:
        raise DataError(f"k must satisfy 2 <= k <= n_rows ({n_rows}), got {k}")
    perm = np.random.default_rng(seed).permutation(n_rows)
    chunks = np.array_split(perm, k)
    folds = []
    for i, test in enumerate(chunks):
        train = np.concatenate([c for j, c in enumerate(chunks) if j != i])
        folds.append(SplitPlan(train_idx=train, test_idx=test, seed=seed))
    return FoldPlan(folds=tuple(folds), k=k, seed=seed)


def project(dataset: Dataset, features: Iterable[int]) -> Dataset:
    """Keep only the given feature columns (in ascending index order)."""
    idx = sorted(set(int(i) for i in features))
    bad = [i for i in idx if not 0 <= i < dataset.n_features]
    if bad:
        raise DataError(f"feature indices out of range: {bad}")
    names = tuple(dataset.feature_names[i] for i in idx)
    return Dataset(names, dataset.X[:, idx], dataset.y)
