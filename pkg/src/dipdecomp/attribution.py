"""DIP splits of feature-importance scores: LOCO, pairwise, and SAGE.

Every score here is a difference of refitted values, so each one inherits
the decomposition ``surplus = standalone + interaction - dependencies``.

* LOCO for feature j is ``v(D) - v(D - j)``, the DIP of ``J = {j}`` against
  the rest.
* SAGE (Shapley effect) averages surpluses ``v(S + j) - v(S)`` over
  coalitions S; each surplus with non-empty S is the DIP of ``{j}`` against
  S on the features ``S + j``. For the empty coalition the whole surplus is
  the standalone value.
"""

from __future__ import annotations

import itertools
import math
import os
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import Dataset, FoldPlan, GroupSpec, SplitPlan, project
from .dip import DipResult, decompose_bundle, fit_bundle
from .learners import LearnerConfig, fit_boosted, fit_constant, fit_ggam, predict

THREADS_ENV = "DIPDECOMP_THREADS"
MAX_EXACT_FEATURES = 12


class AttributionError(ValueError):
    pass


def default_threads() -> int:
    """Worker count from ``$DIPDECOMP_THREADS`` (default 1)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise AttributionError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise AttributionError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def _map(fn, items, n_jobs: int):
    items = list(items)
    if n_jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n_jobs) as ex:
        return list(ex.map(fn, items))


def _check_d(data: Dataset):
    if data.n_features < 2:
        raise AttributionError(f"need at least 2 features, got {data.n_features}")


# -- LOCO ---------------------------------------------------------------------

@dataclass(frozen=True)
class LocoEntry:
    feature: int
    loco: float
    standalone: float
    interaction: float
    dependencies: float
    cross_pred: float
    covariance: float

    @classmethod
    def from_result(cls, feature: int, res: DipResult) -> "LocoEntry":
        return cls(
            feature=feature,
            loco=res.v_joint - res.v_jbar,
            standalone=res.v_j,
            interaction=res.interaction_surplus,
            dependencies=res.dep,
            cross_pred=res.cross_pred,
            covariance=res.covariance,
        )

    def identity_residual(self) -> float:
        return self.loco - (self.standalone + self.interaction - self.dependencies)


LOCO_FIELDS = ("loco", "standalone", "interaction", "dependencies", "cross_pred", "covariance")


@dataclass(frozen=True)
class LocoResult(Sequence):
    """Fold-averaged entries (one per feature) plus the per-fold records."""

    entries: tuple
    per_fold: tuple
    fold_var_y: tuple
    feature_names: tuple
    normalized: bool

    def __getitem__(self, i):
        return self.entries[i]

    def __len__(self):
        return len(self.entries)


def _loco_fold(data: Dataset, split: SplitPlan, config: LearnerConfig, normalize: bool):
    d = data.n_features
    train = data.rows(split.train_idx)
    f_const = fit_constant(train)
    f_full = fit_boosted(train, range(d), config)[0]
    cache = {}
    out = []
    var_y = None
    for j in range(d):
        bundle = fit_bundle(data, split, GroupSpec.complement([j], d), config,
                            f_full=f_full, f_const=f_const, cache=cache)
        res = decompose_bundle(bundle, data, split.test_idx, normalize=normalize)
        var_y = res.normalizer.var_y
        out.append(LocoEntry.from_result(j, res))
    return tuple(out), var_y


def loco_dip(data: Dataset, folds: FoldPlan, config: LearnerConfig = LearnerConfig(),
             normalize: bool = False, n_jobs: int = 1) -> LocoResult:
    """LOCO scores with their DIP split, averaged over folds.

    Within each fold the baseline and the full model are fitted once and
    shared by all features. Normalization, when requested, divides each
    fold's numbers by that fold's test-target variance before averaging.
    """
    _check_d(data)
    if len(folds) == 0:
        raise AttributionError("empty fold plan")
    results = _map(lambda s: _loco_fold(data, s, config, normalize), folds, n_jobs)
    per_fold = tuple(r[0] for r in results)
    entries = []
    for j in range(data.n_features):
        stacked = np.array([[getattr(fold[j], k) for k in LOCO_FIELDS] for fold in per_fold])
        means = stacked.mean(axis=0)
        entries.append(LocoEntry(j, *(float(m) for m in means)))
    return LocoResult(tuple(entries), per_fold, tuple(r[1] for r in results),
                      data.feature_names, normalize)


# -- pairwise -----------------------------------------------------------------

@dataclass(frozen=True)
class PairwiseCell:
    pair: tuple
    result: DipResult


def pairwise_dip(data: Dataset, split: SplitPlan, focus: int, config: LearnerConfig = LearnerConfig(),
                 normalize: bool = False, n_jobs: int = 1) -> list:
    """DIP of ``{focus}`` against each other single feature, all others dropped.

    Group indices in each cell's result refer to the two-column projection
    ``[min(a, b), max(a, b)]``.
    """
    _check_d(data)
    if not 0 <= focus < data.n_features:
        raise AttributionError(f"focus index {focus} out of range")

    def cell(b):
        sub = project(data, [focus, b])
        jf = 0 if focus < b else 1
        group = GroupSpec(frozenset([jf]), frozenset([1 - jf]))
        bundle = fit_bundle(sub, split, group, config)
        return PairwiseCell((focus, b), decompose_bundle(bundle, sub, split.test_idx, normalize))

    return _map(cell, [b for b in range(data.n_features) if b != focus], n_jobs)


# -- SAGE ---------------------------------------------------------------------

def shapley_weight(s_size: int, d: int) -> float:
    """Shapley weight of a coalition of size ``s_size`` among ``d`` features."""
    if d < 1 or not 0 <= s_size <= d - 1:
        raise AttributionError(f"coalition size {s_size} out of range for d={d}")
    return math.factorial(d - s_size - 1) * math.factorial(s_size) / math.factorial(d)


@dataclass(frozen=True)
class SageEntry:
    feature: int
    phi: float
    standalone: float
    avg_interaction: float
    avg_dependencies: float
    n_orderings: int
    std_err: float

    def identity_residual(self) -> float:
        return self.phi - (self.standalone + self.avg_interaction - self.avg_dependencies)


@dataclass(frozen=True)
class SageResult(Sequence):
    """Per-feature entries plus the raw per-ordering terms.

    ``surplus[o, j]``, ``interaction[o, j]`` and ``dependencies[o, j]`` hold
    feature j's terms in ordering ``orderings[o]``; each row of ``surplus``
    telescopes to ``value_full``. In exact mode the per-ordering arrays are
    empty and ``n_orderings`` is ``d!``.
    """

    entries: tuple
    value_full: float
    orderings: np.ndarray
    surplus: np.ndarray
    interaction: np.ndarray
    dependencies: np.ndarray
    var_y: float
    feature_names: tuple
    exact: bool
    normalized: bool

    def __getitem__(self, i):
        return self.entries[i]

    def __len__(self):
        return len(self.entries)


class _CoalitionValues:
    """Test-set values of refitted subset models and groupwise additive fits.

    Everything is keyed by feature-index frozensets, so fits shared by many
    orderings are computed once.
    """

    def __init__(self, data: Dataset, split: SplitPlan, config: LearnerConfig):
        self.data, self.config = data, config
        self.train = data.rows(split.train_idx)
        self.test = data.rows(split.test_idx)
        base = fit_constant(self.train)
        self.base_risk = self._risk(base)
        self.var_y = float(np.var(self.test.y))
        self.v = {frozenset(): 0.0}
        self.v_ggam = {}

    def _risk(self, model) -> float:
        return float(np.mean((predict(model, self.test) - self.test.y) ** 2))

    def _fit_value(self, subset: frozenset) -> float:
        model, _ = fit_boosted(self.train, subset, self.config)
        return self.base_risk - self._risk(model)

    def _fit_ggam_value(self, key) -> float:
        j, s = key
        scope = sorted(s | {j})
        sub = project(self.train, scope)
        jj = scope.index(j)
        group = GroupSpec(frozenset([jj]), frozenset(range(len(scope))) - {jj})
        model, _ = fit_ggam(sub, group, self.config)
        return self.base_risk - self._risk(model)

    def fill(self, subsets, pairs, n_jobs: int):
        subsets = sorted({s for s in subsets if s not in self.v}, key=lambda s: (len(s), sorted(s)))
        for s, val in zip(subsets, _map(self._fit_value, subsets, n_jobs)):
            self.v[s] = val
        pairs = sorted({p for p in pairs if p not in self.v_ggam}, key=lambda p: (p[0], len(p[1]), sorted(p[1])))
        for p, val in zip(pairs, _map(self._fit_ggam_value, pairs, n_jobs)):
            self.v_ggam[p] = val

    def terms(self, j: int, s: frozenset):
        """``(surplus, interaction, dependencies)`` of adding j to coalition s."""
        v_sj = self.v[s | {j}]
        if not s:
            return v_sj, 0.0, 0.0
        psi = v_sj - self.v[frozenset([j])] - self.v[s]
        int_ = v_sj - self.v_ggam[(j, s)]
        return v_sj - self.v[s], int_, int_ - psi


def sample_orderings(d: int, n: int, seed: int) -> np.ndarray:
    """``n`` feature orderings drawn as antithetic pairs.

    Orderings ``2k`` and ``2k + 1`` are a uniform random permutation and its
    reverse; with odd ``n`` the last one is unpaired. Each ordering is still
    marginally uniform, and for ``d = 2`` any even ``n`` gives the exact
    Shapley values.
    """
    rng = np.random.default_rng(seed)
    out = np.empty((n, d), dtype=np.intp)
    for k in range(0, n, 2):
        out[k] = rng.permutation(d)
        if k + 1 < n:
            out[k + 1] = out[k][::-1]
    return out


def sage_dip(data: Dataset, split: SplitPlan, n_orderings: int = 100,
             config: LearnerConfig = LearnerConfig(), exact: bool = False,
             normalize: bool = False, n_jobs: int = 1) -> SageResult:
    """Shapley effects with their DIP split.

    Sampled mode draws ``n_orderings`` permutations (antithetic pairs, see
    :func:`sample_orderings`) seeded with ``config.seed``; exact mode enumerates every coalition with its
    Shapley weight (``d <= 12``).
    """
    d = data.n_features
    _check_d(data)
    if exact and d > MAX_EXACT_FEATURES:
        raise AttributionError(f"exact mode supports at most {MAX_EXACT_FEATURES} features, got {d}")
    if not exact and n_orderings < 1:
        raise AttributionError("n_orderings must be >= 1")
    cv = _CoalitionValues(data, split, config)
    singles = [frozenset([j]) for j in range(d)]

    if exact:
        coalitions = [(j, frozenset(s)) for j in range(d)
                      for r in range(d) for s in itertools.combinations([i for i in range(d) if i != j], r)]
        cv.fill(singles + [s for _, s in coalitions] + [s | {j} for j, s in coalitions],
                [(j, s) for j, s in coalitions if s], n_jobs)
        acc = np.zeros((d, 3))
        for j, s in coalitions:
            acc[j] += shapley_weight(len(s), d) * np.array(cv.terms(j, s))
        orderings = np.zeros((0, d), dtype=np.intp)
        surplus = inter = dep = np.zeros((0, d))
        n_used, std_err = math.factorial(d), np.zeros(d)
    else:
        orderings = sample_orderings(d, n_orderings, config.seed)
        steps = [(int(o[k]), frozenset(int(i) for i in o[:k])) for o in orderings for k in range(d)]
        cv.fill(singles + [s for _, s in steps] + [s | {j} for j, s in steps],
                [(j, s) for j, s in steps if s], n_jobs)
        surplus, inter, dep = (np.zeros((n_orderings, d)) for _ in range(3))
        for o, perm in enumerate(orderings):
            for k, j in enumerate(perm):
                surplus[o, j], inter[o, j], dep[o, j] = cv.terms(int(j), frozenset(int(i) for i in perm[:k]))
        acc = np.column_stack([surplus.mean(axis=0), inter.mean(axis=0), dep.mean(axis=0)])
        n_used = n_orderings
        # antithetic pairs are the independent sampling units
        units = np.array([surplus[k:k + 2].mean(axis=0) for k in range(0, n_orderings, 2)])
        std_err = (units.std(axis=0, ddof=1) / math.sqrt(len(units)) if len(units) > 1
                   else np.zeros(d))

    value_full = cv.v[frozenset(range(d))]
    scale = cv.var_y if normalize else 1.0
    if normalize and not scale > 0:
        raise AttributionError("test target has zero variance")
    entries = tuple(
        SageEntry(j, float(acc[j, 0] / scale), float(cv.v[singles[j]] / scale),
                  float(acc[j, 1] / scale), float(acc[j, 2] / scale), n_used,
                  float(std_err[j] / scale))
        for j in range(d)
    )
    return SageResult(entries, value_full / scale, orderings, surplus / scale, inter / scale,
                      dep / scale, cv.var_y, data.feature_names, exact, normalize)
