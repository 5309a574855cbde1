"""Squared-loss learners: constant baseline, boosted trees, groupwise additive models.

All tree learners share one base learner: a depth-limited regression tree
grown level by level on quantile-binned features, with leaf values equal to
the mean residual of the rows in the leaf. Boosting multiplies each leaf by
the learning rate, so the training MSE cannot increase from one round to
the next.

The groupwise additive model ``g(x) = intercept + g_J(x_J) + g_Jbar(x_Jbar)``
is fitted by cyclic boosting: rounds alternate strictly between the two
groups, each growing a tree on one group's features against the current
residual of the full additive fit. The group holding the lowest feature
index takes the first round, so the fit does not depend on which group is
labelled J.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from . import _kernels
from .data import Dataset, DataError, GroupSpec

CONSTANT = "constant"
TREE_ENSEMBLE = "tree_ensemble"
GROUPWISE_ADDITIVE = "groupwise_additive"


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class LearnerConfig:
    rounds: int = 500
    learning_rate: float = 0.1
    max_depth: int = 4
    min_leaf: int = 20
    n_bins: int = 256
    seed: int = 0

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must lie in (0, 1]")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if self.n_bins < 2:
            raise ValueError("n_bins must be >= 2")


@dataclass(frozen=True, eq=False)
class Tree:
    """Flat binary tree. ``feature[k] == -1`` marks node ``k`` as a leaf.

    ``feature`` indexes the owning model's ``feature_names``; a row goes left
    when its value is ``<= threshold``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def split_features(self) -> set[int]:
        return set(int(f) for f in self.feature if f >= 0)

    def predict(self, Xs: np.ndarray) -> np.ndarray:
        node = np.zeros(Xs.shape[0], dtype=np.intp)
        rows = np.arange(Xs.shape[0])
        while True:
            f = self.feature[node]
            inner = f >= 0
            if not inner.any():
                return self.value[node]
            fi = np.where(inner, f, 0)
            go_left = Xs[rows, fi] <= self.threshold[node]
            nxt = np.where(go_left, self.left[node], self.right[node])
            node = np.where(inner, nxt, node)

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }


@dataclass(frozen=True, eq=False)
class Model:
    """A fitted predictor.

    ``feature_scope`` holds column indices of the training dataset and
    ``feature_names`` the matching names; prediction looks columns up by
    name, so a model can score any dataset carrying those columns.
    """

    kind: str
    intercept: float
    feature_scope: frozenset = frozenset()
    feature_names: tuple = ()
    trees: tuple = ()
    component_j: "Model | None" = None
    component_jbar: "Model | None" = None

    def split_names(self) -> set[str]:
        """Names of every feature some tree actually splits on."""
        out = set()
        for t in self.trees:
            out |= {self.feature_names[f] for f in t.split_features()}
        for c in (self.component_j, self.component_jbar):
            if c is not None:
                out |= c.split_names()
        return out

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "intercept": self.intercept,
            "feature_scope": sorted(self.feature_scope),
            "feature_names": list(self.feature_names),
        }
        if self.trees:
            d["trees"] = [t.to_dict() for t in self.trees]
        if self.kind == GROUPWISE_ADDITIVE:
            d["component_j"] = self.component_j.to_dict()
            d["component_jbar"] = self.component_jbar.to_dict()
        return d


def dump_model(model: Model) -> str:
    """JSON dump of a model's structure, for debugging only."""
    return json.dumps(model.to_dict(), indent=1)


@dataclass(frozen=True)
class FitDiagnostics:
    train_mse_per_round: tuple = field(default=())
    final_train_mse: float = 0.0


# -- binning -------------------------------------------------------------------

def _bin_edges(x: np.ndarray, n_bins: int) -> np.ndarray:
    u = np.unique(x)
    if u.size <= n_bins:
        return u[:-1]
    qs = np.quantile(x, np.arange(1, n_bins) / n_bins)
    edges = np.unique(qs)
    return edges[edges < u[-1]]


def _bin_columns(Xs: np.ndarray, n_bins: int):
    edges = [_bin_edges(Xs[:, k], n_bins) for k in range(Xs.shape[1])]
    B = np.empty(Xs.shape, dtype=np.intp if n_bins > 65535 else np.uint16)
    for k, e in enumerate(edges):
        B[:, k] = np.searchsorted(e, Xs[:, k], side="left")
    return B, edges


# -- tree growing --------------------------------------------------------------

def _grow(B, edges, cols, r, max_depth, min_leaf, lr):
    """Grow one tree on binned columns ``cols`` of ``B`` against residual ``r``.

    Returns the tree (thresholds in raw feature units, features numbered by
    position in ``cols``) and the per-row leaf value, used to update the
    training predictions without a second traversal.
    """
    n = r.shape[0]
    cols_arr = np.asarray(cols, dtype=np.intp)
    n_edges = np.array([len(edges[c]) for c in cols])
    n_bins = int(n_edges.max()) + 1
    feat, thr, left = [-1], [0.0], [-1]
    split_col, split_bin = [-1], [0]
    node_of_row = np.zeros(n, dtype=np.intp)
    active = [0]
    for _ in range(max_depth):
        if not active:
            break
        m = len(active)
        pos_of_node = np.full(len(feat), -1, dtype=np.intp)
        pos_of_node[active] = np.arange(m)
        hs, hc, ss = _kernels.level_histograms(B, cols_arr, node_of_row, pos_of_node, r, m, n_bins)
        tot = hs[:, 0, :].sum(axis=1)
        cnt = hc[:, 0, :].sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            parent = np.where(cnt > 0, tot * tot / cnt, 0.0)
            # left side of split b holds bins 0..b
            ls = np.cumsum(hs, axis=2)
            lc = np.cumsum(hc, axis=2)
            rs = tot[:, None, None] - ls
            rc = cnt[:, None, None] - lc
            ok = (lc >= min_leaf) & (rc >= min_leaf)
            ok &= np.arange(n_bins)[None, None, :] < n_edges[None, :, None]
            gain = np.where(ok, ls * ls / lc + rs * rs / rc - parent[:, None, None], -np.inf)
        # bin-major flattening: ties go to the lowest bin, then the lowest feature
        p = len(cols)
        flat = gain.transpose(0, 2, 1).reshape(m, n_bins * p)
        best = np.argmax(flat, axis=1)
        best_gain = flat[np.arange(m), best]
        best_bin, best_feat = np.divmod(best, p)
        # ignore gains at the level of floating noise
        split = np.isfinite(best_gain) & (best_gain > 1e-12 * np.maximum(ss, 1e-300))
        if not split.any():
            break
        new_active = []
        for q in np.flatnonzero(split):
            nid = active[q]
            k, b = int(best_feat[q]), int(best_bin[q])
            feat[nid] = k
            thr[nid] = float(edges[cols[k]][b])
            split_col[nid] = cols[k]
            split_bin[nid] = b
            lid = len(feat)
            feat += [-1, -1]
            thr += [0.0, 0.0]
            left += [-1, -1]
            split_col += [-1, -1]
            split_bin += [0, 0]
            left[nid] = lid
            new_active += [lid, lid + 1]
        _kernels.route_rows(B, node_of_row, np.asarray(split_col, dtype=np.intp),
                            np.asarray(split_bin, dtype=np.intp), np.asarray(left, dtype=np.intp))
        active = new_active
    right = [l + 1 if l >= 0 else -1 for l in left]
    step = np.empty(n)
    value = _kernels.leaf_values(node_of_row, r, len(feat), lr, step)
    tree = Tree(
        feature=np.asarray(feat, dtype=np.intp),
        threshold=np.asarray(thr, dtype=np.float64),
        left=np.asarray(left, dtype=np.intp),
        right=np.asarray(right, dtype=np.intp),
        value=value,
    )
    return tree, step


def _scope_indices(train: Dataset, scope: Iterable[int]) -> list[int]:
    idx = sorted(set(int(i) for i in scope))
    bad = [i for i in idx if not 0 <= i < train.n_features]
    if bad:
        raise DataError(f"scope indices out of range: {bad}")
    return idx


def _constant(train: Dataset, value: float | None = None) -> Model:
    return Model(kind=CONSTANT, intercept=float(np.mean(train.y)) if value is None else value)


# -- public API ----------------------------------------------------------------

def fit_constant(train: Dataset) -> Model:
    if train.n_rows < 1:
        raise FitError("cannot fit a constant to zero rows")
    return _constant(train)


def fit_boosted(train: Dataset, scope: Iterable[int], config: LearnerConfig = LearnerConfig()):
    """Gradient-boosted regression trees restricted to the features in ``scope``.

    Returns ``(model, diagnostics)``. A constant target yields a constant
    model and all-zero diagnostics. The fit has no random component, so
    identical inputs give identical trees; ``config.seed`` is carried for the
    record only.
    """
    idx = _scope_indices(train, scope)
    if not idx:
        raise FitError("empty scope: use fit_constant for the empty feature set")
    if train.n_rows <= config.min_leaf:
        raise FitError(f"need more than min_leaf={config.min_leaf} rows, got {train.n_rows}")
    y = train.y
    if np.ptp(y) == 0.0:
        return _constant(train), FitDiagnostics((0.0,) * config.rounds, 0.0)
    names = tuple(train.feature_names[i] for i in idx)
    B, edges = _bin_columns(train.X[:, idx], config.n_bins)
    cols = list(range(len(idx)))
    base = float(np.mean(y))
    F = np.full(y.shape, base)
    trees, mse = [], []
    for _ in range(config.rounds):
        tree, step = _grow(B, edges, cols, y - F, config.max_depth, config.min_leaf, config.learning_rate)
        F = F + step
        trees.append(tree)
        mse.append(float(np.mean((y - F) ** 2)))
    model = Model(TREE_ENSEMBLE, base, frozenset(idx), names, tuple(trees))
    return model, FitDiagnostics(tuple(mse), mse[-1])


def fit_ggam(train: Dataset, group: GroupSpec, config: LearnerConfig = LearnerConfig()):
    """Groupwise additive model fitted by cyclic boosting over the two groups.

    Total rounds equal ``config.rounds``; trees alternate between the groups,
    starting with the group that contains the lowest feature index (which
    also gets the extra tree when the count is odd). The result is centred
    with :func:`center_components`.
    """
    group.validate(train.n_features)
    if train.n_rows <= config.min_leaf:
        raise FitError(f"need more than min_leaf={config.min_leaf} rows, got {train.n_rows}")
    j_idx, jbar_idx = sorted(group.group_j), sorted(group.group_jbar)
    names = train.feature_names
    y = train.y
    if np.ptp(y) == 0.0:
        empty_j = Model(TREE_ENSEMBLE, 0.0, frozenset(j_idx), tuple(names[i] for i in j_idx))
        empty_jbar = Model(TREE_ENSEMBLE, 0.0, frozenset(jbar_idx), tuple(names[i] for i in jbar_idx))
        model = Model(GROUPWISE_ADDITIVE, float(np.mean(y)), group.all_features, names,
                      component_j=empty_j, component_jbar=empty_jbar)
        return model, FitDiagnostics((0.0,) * config.rounds, 0.0)
    order = j_idx + jbar_idx
    B, edges = _bin_columns(train.X[:, order], config.n_bins)
    cols_j = list(range(len(j_idx)))
    cols_jbar = list(range(len(j_idx), len(order)))
    base = float(np.mean(y))
    F = np.full(y.shape, base)
    trees_j, trees_jbar, mse = [], [], []
    # the group holding the lowest feature index always goes first, so that
    # swapping the roles of J and Jbar yields the same fit
    j_first = j_idx[0] < jbar_idx[0]
    for t in range(config.rounds):
        on_j = (t % 2 == 0) == j_first
        tree, step = _grow(B, edges, cols_j if on_j else cols_jbar, y - F,
                           config.max_depth, config.min_leaf, config.learning_rate)
        F = F + step
        (trees_j if on_j else trees_jbar).append(tree)
        mse.append(float(np.mean((y - F) ** 2)))
    comp_j = Model(TREE_ENSEMBLE, 0.0, frozenset(j_idx), tuple(names[i] for i in j_idx), tuple(trees_j))
    comp_jbar = Model(TREE_ENSEMBLE, 0.0, frozenset(jbar_idx), tuple(names[i] for i in jbar_idx),
                      tuple(trees_jbar))
    model = Model(GROUPWISE_ADDITIVE, base, group.all_features, names,
                  component_j=comp_j, component_jbar=comp_jbar)
    return center_components(model, train), FitDiagnostics(tuple(mse), mse[-1])


def center_components(model: Model, train: Dataset) -> Model:
    """Move each component's training mean into the shared intercept."""
    if model.kind != GROUPWISE_ADDITIVE:
        raise FitError(f"center_components needs a groupwise additive model, got {model.kind}")
    mj = float(np.mean(predict(model.component_j, train)))
    mjbar = float(np.mean(predict(model.component_jbar, train)))
    cj = replace(model.component_j, intercept=model.component_j.intercept - mj)
    cjbar = replace(model.component_jbar, intercept=model.component_jbar.intercept - mjbar)
    return replace(model, intercept=model.intercept + mj + mjbar, component_j=cj, component_jbar=cjbar)


def _columns(model: Model, rows: Dataset) -> np.ndarray:
    try:
        idx = [rows.feature_names.index(n) for n in model.feature_names]
    except ValueError:
        missing = sorted(set(model.feature_names) - set(rows.feature_names))
        raise DataError(f"rows lack model features {missing}") from None
    return rows.X[:, idx]


def predict(model: Model, rows: Dataset) -> np.ndarray:
    if model.kind == CONSTANT:
        return np.full(rows.n_rows, model.intercept)
    if model.kind == GROUPWISE_ADDITIVE:
        return (model.intercept + predict(model.component_j, rows)
                + predict(model.component_jbar, rows))
    Xs = np.ascontiguousarray(_columns(model, rows))
    out = np.full(rows.n_rows, model.intercept)
    if model.trees:
        _kernels.predict_forest(Xs, *_flatten(model.trees), out)
    return out


def _flatten(trees):
    sizes = [t.n_nodes for t in trees]
    offsets = np.zeros(len(trees) + 1, dtype=np.intp)
    offsets[1:] = np.cumsum(sizes)
    return (
        np.concatenate([t.feature for t in trees]),
        np.concatenate([t.threshold for t in trees]),
        np.concatenate([t.left for t in trees]),
        np.concatenate([t.right for t in trees]),
        np.concatenate([t.value for t in trees]),
        offsets,
    )


def component_values(model: Model, rows: Dataset, which: str) -> np.ndarray:
    """Centred component ``g_J`` (``which="j"``) or ``g_Jbar`` (``"jbar"``) per row."""
    if model.kind != GROUPWISE_ADDITIVE:
        raise FitError(f"component_values needs a groupwise additive model, got {model.kind}")
    if which == "j":
        return predict(model.component_j, rows)
    if which == "jbar":
        return predict(model.component_jbar, rows)
    raise ValueError(f"which must be 'j' or 'jbar', got {which!r}")

