import itertools
import math

import numpy as np
import pytest

from dipdecomp import attribution
from dipdecomp import synthetic as syn
from dipdecomp.attribution import (
    AttributionError,
    loco_dip,
    pairwise_dip,
    sage_dip,
    sample_orderings,
    shapley_weight,
)
from dipdecomp.data import Dataset, GroupSpec, holdout_split, kfold_split
from dipdecomp.dip import decompose
from dipdecomp.learners import LearnerConfig, fit_boosted, fit_constant, predict

SMALL = LearnerConfig(rounds=60, max_depth=3, min_leaf=10)
TINY = LearnerConfig(rounds=8, max_depth=2, min_leaf=5, n_bins=16)


def _toy(n=600, d=4, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    X[:, 1] += 0.7 * X[:, 0]
    y = X[:, 0] + X[:, 1] * X[:, -1] + 0.3 * rng.normal(size=n)
    return Dataset(tuple(f"f{i}" for i in range(d)), X, y)


def _rel(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(abs(a), abs(b), 1e-300)


# -- Shapley weights

def test_shapley_weight_examples():
    assert shapley_weight(0, 2) == 0.5
    assert shapley_weight(1, 3) == pytest.approx(1 / 6, abs=0)
    d = 5
    total = sum(shapley_weight(len(s), d) for r in range(d) for s in itertools.combinations(range(d - 1), r))
    assert total == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(AttributionError):
        shapley_weight(3, 3)
    with pytest.raises(AttributionError):
        shapley_weight(-1, 3)


def test_sample_orderings_antithetic():
    o = sample_orderings(5, 7, seed=3)
    assert o.shape == (7, 5)
    for row in o:
        assert sorted(row) == list(range(5))
    for k in range(0, 6, 2):
        np.testing.assert_array_equal(o[k + 1], o[k][::-1])
    np.testing.assert_array_equal(o, sample_orderings(5, 7, seed=3))


# -- LOCO

def test_loco_identity_per_fold_and_means():
    ds = _toy()
    res = loco_dip(ds, kfold_split(ds.n_rows, 3, seed=0), SMALL)
    assert len(res) == ds.n_features and len(res.per_fold) == 3
    for fold in res.per_fold:
        for e in fold:
            assert _rel(e.loco, e.standalone + e.interaction - e.dependencies, 1e-12)
    for j, e in enumerate(res):
        assert e.feature == j
        assert abs(e.identity_residual()) <= 1e-12 * max(1, abs(e.loco))
        assert e.loco == pytest.approx(np.mean([f[j].loco for f in res.per_fold]), rel=1e-12)


def test_loco_matches_decompose_on_one_fold():
    ds = _toy(seed=1)
    folds = kfold_split(ds.n_rows, 2, seed=1)
    res = loco_dip(ds, folds, SMALL)
    r = decompose(ds, folds.folds[0], GroupSpec.complement([2], ds.n_features), SMALL)
    e = res.per_fold[0][2]
    assert e.loco == r.v_joint - r.v_jbar
    assert (e.standalone, e.interaction, e.dependencies) == (r.v_j, r.interaction_surplus, r.dep)


def test_loco_threads_deterministic():
    ds = _toy(seed=2, d=3)
    folds = kfold_split(ds.n_rows, 3, seed=2)
    a = loco_dip(ds, folds, SMALL, normalize=True, n_jobs=1)
    b = loco_dip(ds, folds, SMALL, normalize=True, n_jobs=3)
    assert a.entries == b.entries and a.per_fold == b.per_fold


def test_loco_independent_additive():
    # no cooperation: LOCO equals the standalone value
    rng = np.random.default_rng(3)
    X = rng.normal(size=(12000, 2))
    ds = Dataset(("a", "b"), X, np.sin(X[:, 0]) + 0.5 * X[:, 1] ** 2)
    res = loco_dip(ds, kfold_split(ds.n_rows, 3, seed=3), LearnerConfig(rounds=200), normalize=True)
    for e in res:
        assert e.loco == pytest.approx(e.standalone, abs=0.03)
        assert abs(e.interaction) < 0.02 and abs(e.dependencies) < 0.03


def test_loco_student_redundancy():
    # v(1) = 9, v(1u2) = 12, Dep = 6, Int = 0, Var Y = 12
    ds = syn.gen_student("redundancy", 30000, seed=4)
    res = loco_dip(ds, kfold_split(ds.n_rows, 3, seed=4), LearnerConfig(rounds=100), normalize=True)
    e = res[0]
    assert e.loco == pytest.approx(0.25, abs=0.03)
    assert e.standalone == pytest.approx(0.75, abs=0.03)
    assert e.dependencies == pytest.approx(0.5, abs=0.03)


def test_loco_needs_two_features():
    ds = Dataset(("a",), np.zeros((10, 1)), np.arange(10.0))
    with pytest.raises(AttributionError):
        loco_dip(ds, kfold_split(10, 2), SMALL)


# -- pairwise

def test_pairwise_irrelevant_focus():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(6000, 3))
    ds = Dataset(("noise", "a", "b"), X, X[:, 1] + X[:, 2] ** 2)
    cells = pairwise_dip(ds, holdout_split(ds.n_rows, 0.2, 5), 0, SMALL, normalize=True)
    assert [c.pair for c in cells] == [(0, 1), (0, 2)]
    for c in cells:
        assert abs(c.result.v_j) < 0.02


def test_pairwise_two_features_equals_decompose():
    ds = syn.gen_quadratic_trio(1, 3000, seed=0)
    sp = holdout_split(ds.n_rows, 0.2, 0)
    (cell,) = pairwise_dip(ds, sp, 0, SMALL)
    r = decompose(ds, sp, GroupSpec(frozenset([0]), frozenset([1])), SMALL)
    assert cell.result.values() == r.values()


def test_pairwise_symmetry():
    ds = _toy(d=3, seed=6)
    sp = holdout_split(ds.n_rows, 0.2, 6)
    ab = {c.pair: c.result for c in pairwise_dip(ds, sp, 0, SMALL)}
    ba = {c.pair: c.result for c in pairwise_dip(ds, sp, 2, SMALL)}
    x, y = ab[(0, 2)], ba[(2, 0)]
    assert (x.v_j, x.v_jbar) == (y.v_jbar, y.v_j)
    for f in ("psi", "interaction_surplus", "dep", "cross_pred", "covariance"):
        assert getattr(x, f) == pytest.approx(getattr(y, f), abs=1e-12)


# -- SAGE

def test_sage_two_features_closed_form():
    ds = _toy(d=2, seed=7)
    sp = holdout_split(ds.n_rows, 0.25, 7)
    res = sage_dip(ds, sp, config=SMALL, exact=True)
    tr, te = ds.rows(sp.train_idx), ds.rows(sp.test_idx)
    base = np.mean((predict(fit_constant(tr), te) - te.y) ** 2)

    def v(scope):
        m, _ = fit_boosted(tr, scope, SMALL)
        return base - np.mean((predict(m, te) - te.y) ** 2)

    v1, v2, v12 = v([0]), v([1]), v([0, 1])
    assert res[0].phi == pytest.approx((v1 + v12 - v2) / 2, abs=1e-12)
    assert res[1].phi == pytest.approx((v2 + v12 - v1) / 2, abs=1e-12)
    assert res[0].n_orderings == 2 and res.exact


def test_sage_sampled_d2_equals_exact():
    ds = _toy(d=2, seed=8)
    sp = holdout_split(ds.n_rows, 0.25, 8)
    a = sage_dip(ds, sp, 10, SMALL)
    b = sage_dip(ds, sp, config=SMALL, exact=True)
    for x, y in zip(a, b):
        assert x.phi == pytest.approx(y.phi, abs=1e-12)
        assert x.avg_dependencies == pytest.approx(y.avg_dependencies, abs=1e-12)


def test_sage_telescoping_and_decomposition():
    ds = _toy(d=4, seed=9)
    res = sage_dip(ds, holdout_split(ds.n_rows, 0.25, 9), 12, TINY)
    for row in res.surplus:
        assert _rel(row.sum(), res.value_full)
    for e in res:
        assert abs(e.identity_residual()) <= 1e-9 * max(abs(e.phi), abs(e.standalone), 1e-300)
        assert e.n_orderings == 12
    assert _rel(sum(e.phi for e in res), res.value_full)


def test_sage_exact_efficiency():
    ds = _toy(d=5, n=300, seed=10)
    res = sage_dip(ds, holdout_split(ds.n_rows, 0.25, 10), config=TINY, exact=True)
    assert _rel(sum(e.phi for e in res), res.value_full)
    assert res[0].n_orderings == math.factorial(5)
    assert all(e.std_err == 0.0 for e in res)


def test_sage_student_redundancy():
    # Shapley values (9 + (12 - 9)) / 2 = 6 for both features
    ds = syn.gen_student("redundancy", 20000, seed=11)
    res = sage_dip(ds, holdout_split(ds.n_rows, 0.2, 11), 20, LearnerConfig(rounds=100))
    for e in res:
        assert e.phi == pytest.approx(6.0, abs=0.2)
    norm = sage_dip(ds, holdout_split(ds.n_rows, 0.2, 11), 20, LearnerConfig(rounds=100), normalize=True)
    for e in norm:
        assert e.phi == pytest.approx(0.5, abs=0.02)


def test_sage_sampled_within_error_of_exact():
    # std_err measures ordering noise only, so compare against the exact average on the same fits
    ds = _toy(d=4, n=800, seed=12)
    sp = holdout_split(ds.n_rows, 0.25, 12)
    sampled = sage_dip(ds, sp, 200, SMALL)
    exact = sage_dip(ds, sp, config=SMALL, exact=True)
    for s, e in zip(sampled, exact):
        assert abs(s.phi - e.phi) <= 4 * s.std_err + 1e-9


def test_sage_symmetry_exchangeable():
    rng = np.random.default_rng(12)
    X = rng.normal(size=(40000, 3))
    ds = Dataset(("a", "b", "c"), X, X[:, 0] + X[:, 1] + X[:, 0] * X[:, 1] + 0.5 * X[:, 2])
    res = sage_dip(ds, holdout_split(ds.n_rows, 0.2, 12), config=LearnerConfig(rounds=200), exact=True,
                   normalize=True)
    # Var Y = 3.25; c explains 0.25 alone, a and b split the rest equally
    expect = [(1 - 0.25 / 3.25) / 2] * 2 + [0.25 / 3.25]
    for e, x in zip(res, expect):
        assert e.phi == pytest.approx(x, abs=0.04)


def test_sage_caches_coalition_fits(monkeypatch):
    calls = {"boost": 0, "ggam": 0}
    real_boost, real_ggam = attribution.fit_boosted, attribution.fit_ggam

    def boost(*a, **k):
        calls["boost"] += 1
        return real_boost(*a, **k)

    def ggam(*a, **k):
        calls["ggam"] += 1
        return real_ggam(*a, **k)

    monkeypatch.setattr(attribution, "fit_boosted", boost)
    monkeypatch.setattr(attribution, "fit_ggam", ggam)
    ds = _toy(d=3, n=300, seed=13)
    sage_dip(ds, holdout_split(ds.n_rows, 0.25, 13), 40, TINY)
    assert calls["boost"] <= 2 ** 3 - 1
    assert calls["ggam"] <= 3 * (2 ** 2 - 1)


def test_sage_threads_deterministic():
    ds = _toy(d=3, n=300, seed=14)
    sp = holdout_split(ds.n_rows, 0.25, 14)
    a = sage_dip(ds, sp, 6, TINY, n_jobs=1)
    b = sage_dip(ds, sp, 6, TINY, n_jobs=2)
    assert a.entries == b.entries
    np.testing.assert_array_equal(a.surplus, b.surplus)


def test_sage_errors():
    ds = _toy(d=2, n=100)
    sp = holdout_split(ds.n_rows, 0.2, 0)
    with pytest.raises(AttributionError):
        sage_dip(ds, sp, 0, TINY)
    wide = Dataset(tuple(f"f{i}" for i in range(13)), np.zeros((30, 13)), np.arange(30.0))
    with pytest.raises(AttributionError):
        sage_dip(wide, holdout_split(30, 0.2, 0), config=TINY, exact=True)


def test_default_threads(monkeypatch):
    monkeypatch.delenv(attribution.THREADS_ENV, raising=False)
    assert attribution.default_threads() == 1
    monkeypatch.setenv(attribution.THREADS_ENV, "4")
    assert attribution.default_threads() == 4
    monkeypatch.setenv(attribution.THREADS_ENV, "zero")
    with pytest.raises(AttributionError):
        attribution.default_threads()
