"""Decomposition of the joint predictive power of two feature groups.

For groups J and Jbar the joint value splits as

    v(J u Jbar) = v(J) + v(Jbar) + Int - Dep,      Dep = CP + CO

where ``Int`` is the variance of the pure interaction (estimated as the test
risk of the groupwise additive fit minus that of the unrestricted fit),
``CO`` is twice the covariance of the two additive components and ``CP`` the
cross-predictability of the components, obtained as ``Dep - CO``.

Sign convention: ``psi = Int - Dep``, so a positive ``dep`` lowers the joint
value.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset, GroupSpec, SplitPlan
from .learners import (
    LearnerConfig,
    Model,
    component_values,
    fit_boosted,
    fit_constant,
    fit_ggam,
    predict,
)
from .valuation import Normalizer, ValuationError, _check_idx

VALUE_FIELDS = (
    "v_j", "v_jbar", "v_joint", "psi", "interaction_surplus", "dep", "cross_pred", "covariance",
)


@dataclass(frozen=True)
class DipResult:
    group: GroupSpec
    v_j: float
    v_jbar: float
    v_joint: float
    psi: float
    interaction_surplus: float
    dep: float
    cross_pred: float
    covariance: float
    normalizer: Normalizer
    normalized: bool = False

    def as_normalized(self) -> "DipResult":
        """Every value field divided by the test-set target variance."""
        if self.normalized:
            return self
        s = self.normalizer.var_y
        return replace(self, normalized=True, **{k: getattr(self, k) / s for k in VALUE_FIELDS})

    def values(self) -> dict:
        return {k: getattr(self, k) for k in VALUE_FIELDS}

    def identity_residuals(self) -> dict:
        """Deviations from the three additivity identities (zero up to rounding)."""
        return {
            "psi": self.psi - (self.v_joint - self.v_j - self.v_jbar),
            "int_minus_dep": self.psi - (self.interaction_surplus - self.dep),
            "dep_split": self.dep - (self.cross_pred + self.covariance),
        }


@dataclass(frozen=True)
class FitBundle:
    f_full: Model
    f_j: Model
    f_jbar: Model
    f_const: Model
    ggam: Model
    group: GroupSpec


def _restricted(train: Dataset, scope, config: LearnerConfig) -> Model:
    return fit_boosted(train, scope, config)[0]


def fit_bundle(data: Dataset, split: SplitPlan, group: GroupSpec, config: LearnerConfig = LearnerConfig(),
               *, f_full: Model | None = None, f_const: Model | None = None,
               cache: dict | None = None) -> FitBundle:
    """Fit the five models on the training rows.

    ``f_full`` and ``f_const`` may be passed in when several decompositions
    share one split (LOCO); only the two restricted fits and the groupwise
    additive fit are then new. ``cache`` maps feature-index frozensets to
    restricted fits on this split and is filled as a side effect.
    """
    group.validate(data.n_features)
    train = data.rows(split.train_idx)
    if cache is None:
        cache = {}
    if f_const is None:
        f_const = fit_constant(train)
    if f_full is None:
        f_full = _restricted(train, range(data.n_features), config)
    cache.setdefault(frozenset(range(data.n_features)), f_full)
    for scope in (group.group_j, group.group_jbar):
        if scope not in cache:
            cache[scope] = _restricted(train, scope, config)
    f_j, f_jbar = cache[group.group_j], cache[group.group_jbar]
    ggam, _ = fit_ggam(train, group, config)
    return FitBundle(f_full, f_j, f_jbar, f_const, ggam, group)


class _TestRisks:
    """Test-set predictions and risks, computed once per bundle and index set."""

    def __init__(self, bundle: FitBundle, data: Dataset, test_idx):
        idx = _check_idx(test_idx)
        self.rows = data.rows(idx)
        y = self.rows.y
        self.var_y = float(np.var(y))
        self._y = y
        self._cache = {}
        self.bundle = bundle

    def risk(self, name: str) -> float:
        if name not in self._cache:
            pred = predict(getattr(self.bundle, name), self.rows)
            self._cache[name] = float(np.mean((pred - self._y) ** 2))
        return self._cache[name]

    def value(self, name: str) -> float:
        return self.risk("f_const") - self.risk(name)


def _psi(r: _TestRisks) -> float:
    return r.value("f_full") - r.value("f_j") - r.value("f_jbar")


def _int(r: _TestRisks) -> float:
    return r.value("f_full") - r.value("ggam")


def _covariance(r: _TestRisks) -> float:
    gj = component_values(r.bundle.ggam, r.rows, "j")
    gjbar = component_values(r.bundle.ggam, r.rows, "jbar")
    # population (1/n) covariance, matching the 1/n empirical risks
    return 2.0 * float(np.mean((gj - gj.mean()) * (gjbar - gjbar.mean())))


def cooperative_impact(bundle: FitBundle, data: Dataset, test_idx) -> float:
    return _psi(_TestRisks(bundle, data, test_idx))


def interaction_surplus(bundle: FitBundle, data: Dataset, test_idx) -> float:
    """Test risk of the groupwise additive fit minus that of the full fit."""
    return _int(_TestRisks(bundle, data, test_idx))


def main_effect_dependencies(psi: float, int_surplus: float) -> float:
    return int_surplus - psi


def split_dependencies(bundle: FitBundle, data: Dataset, test_idx, dep: float) -> tuple[float, float]:
    """Return ``(cross_pred, covariance)`` with ``cross_pred = dep - covariance``."""
    co = _covariance(_TestRisks(bundle, data, test_idx))
    return dep - co, co


def decompose_bundle(bundle: FitBundle, data: Dataset, test_idx, normalize: bool = False) -> DipResult:
    r = _TestRisks(bundle, data, test_idx)
    if not r.var_y > 0:
        raise ValuationError("test target has zero variance")
    v_j, v_jbar, v_joint = r.value("f_j"), r.value("f_jbar"), r.value("f_full")
    psi = v_joint - v_j - v_jbar
    int_ = _int(r)
    dep = main_effect_dependencies(psi, int_)
    co = _covariance(r)
    res = DipResult(
        group=bundle.group,
        v_j=v_j,
        v_jbar=v_jbar,
        v_joint=v_joint,
        psi=psi,
        interaction_surplus=int_,
        dep=dep,
        cross_pred=dep - co,
        covariance=co,
        normalizer=Normalizer(r.var_y),
    )
    return res.as_normalized() if normalize else res


def decompose(data: Dataset, split: SplitPlan, group: GroupSpec, config: LearnerConfig = LearnerConfig(),
              normalize: bool = False) -> DipResult:
    """Fit the bundle on the training rows and decompose on the test rows."""
    bundle = fit_bundle(data, split, group, config)
    return decompose_bundle(bundle, data, split.test_idx, normalize=normalize)


def result_to_dict(res: DipResult) -> dict:
    d = {k: getattr(res, k) for k in VALUE_FIELDS}
    d["group_j"] = sorted(res.group.group_j)
    d["group_jbar"] = sorted(res.group.group_jbar)
    d["var_y"] = res.normalizer.var_y
    d["normalized"] = res.normalized
    return d


def result_from_dict(d: dict) -> DipResult:
    return DipResult(
        group=GroupSpec(frozenset(d["group_j"]), frozenset(d["group_jbar"])),
        normalizer=Normalizer(d["var_y"]),
        normalized=bool(d["normalized"]),
        **{k: float(d[k]) for k in VALUE_FIELDS},
    )

