"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``python tests/test_acceptance.py`` or ``pytest tests/test_acceptance.py``;
the lines are collected into the "acceptance criteria" section of the summary.
"""

import math
import os
import sys
import time

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from dipdecomp import synthetic as syn
from dipdecomp.attribution import loco_dip, sage_dip
from dipdecomp.data import Dataset, GroupSpec, holdout_split, kfold_split, load_csv
from dipdecomp.dip import decompose
from dipdecomp.learners import LearnerConfig, fit_boosted, predict
from dipdecomp.report import report_from_dip, report_from_loco, report_from_sage, verify_report

from conftest import ACCEPTANCE_LINES, N_LARGE, ORACLE_DGPS, SEED

WINE_ENV = "DIPDECOMP_WINE_CSV"


def _record(n, ok, detail):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)
    return ok


def _within(got, expect, tol):
    return all(abs(g - e) <= tol for g, e in zip(got, expect))


def _fmt(xs):
    return "(" + ", ".join(f"{x:.4f}" for x in xs) + ")"


# 1 -- Gaussian oracle match, fresh fit with timing

def test_c1_gaussian_oracle():
    t0 = time.perf_counter()
    data = syn.make_example("gaussian", N_LARGE, seed=SEED, c=math.sqrt(6), beta=0.5)
    split = holdout_split(data.n_rows, 0.2, seed=SEED)
    r = decompose(data, split, GroupSpec(frozenset([0]), frozenset([1])), LearnerConfig(), normalize=True)
    elapsed = time.perf_counter() - t0
    got = (r.v_j, r.v_jbar, r.interaction_surplus, r.cross_pred, r.covariance)
    printed = (0.5, 0.5, 0.2571, 0.0705, 0.1868)
    ok = _within(got, printed, 0.03) and elapsed < 120
    _record(1, ok, f"(v1, v2, Int, CP, CO) = {_fmt(got)} vs {_fmt(printed)} +-0.03; {elapsed:.1f}s < 120s")
    assert ok


# 2 -- cancellation of interaction surplus and dependencies

def test_c2_cancellation(large_fits):
    r1 = large_fits.get("gaussian-dgp1")[3].as_normalized()
    r2 = large_fits.get("gaussian-dgp2")[3].as_normalized()
    ok = abs(r1.psi) <= 0.02 and abs(r2.psi) <= 0.02 and r2.interaction_surplus >= 0.2
    _record(2, ok, f"psi DGP1 {r1.psi:+.4f}, DGP2 {r2.psi:+.4f} (|.| <= 0.02); "
                   f"DGP2 Int {r2.interaction_surplus:.4f} >= 0.2 (seed {SEED})")
    assert ok


# 3 -- student examples against the enumeration oracle

STUDENT_PRINTED = {
    "redundancy": (9, 9, 12, 0, 2, 4),
    "enhancement": (2.25, 0, 3, 0, 1.25, -2),
    "interaction": (9, 9, 15, 3, 2, 4),
}


def test_c3_student_oracles(large_fits):
    ok, parts = True, []
    for variant, printed in STUDENT_PRINTED.items():
        o = syn.oracle_student(variant)
        oracle = (o.v_j, o.v_jbar, o.v_joint, o.int, o.cp, o.co)
        exact = all(abs(a - b) <= 1e-12 for a, b in zip(oracle, printed))
        data, split, _, r = large_fits.get(f"student-{variant}")
        var_test = float(np.var(data.y[split.test_idx]))
        got = (r.v_j, r.v_jbar, r.v_joint, r.interaction_surplus, r.cross_pred, r.covariance)
        close = _within(got, oracle, 0.15)
        ok &= exact and close
        dev = max(abs(a - b) for a, b in zip(got, oracle))
        parts.append(f"{variant} {_fmt(got)} max|dev| {dev:.3f} test Var(Y) {var_test:.3f} "
                     f"vs {o.var_y:g}, oracle-exact={exact}")
    _record(3, ok, "; ".join(parts) + " (+-0.15)")
    assert ok


# 4 -- digits: strong correlation, no dependencies

def test_c4_digits(large_fits):
    data, _, _, r = large_fits.get("digits")
    r = r.as_normalized()
    corr = float(np.corrcoef(data.X.T)[0, 1])
    vals = dict(Dep=r.dep, CP=r.cross_pred, CO=r.covariance, Int=r.interaction_surplus)
    ok = corr > 0.98 and all(abs(v) <= 0.02 for v in vals.values())
    _record(4, ok, f"corr {corr:.4f} > 0.98; " + ", ".join(f"|{k}| {abs(v):.4f}" for k, v in vals.items())
            + " <= 0.02")
    assert ok


# 5 -- identity suite on random small datasets

TINY = LearnerConfig(rounds=6, max_depth=2, min_leaf=3, n_bins=16)
RTOL = 1e-9


def _rel_ok(lhs, terms):
    return abs(lhs - sum(terms)) <= RTOL * max([abs(lhs)] + [abs(t) for t in terms] + [1e-300])


def _random_dataset(seed, n, d, shape):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    X[:, 1:] += rng.uniform(-1, 1) * X[:, :1]
    if shape == 0:
        y = X @ rng.normal(size=d)
    elif shape == 1:
        y = X[:, 0] * X[:, -1] + np.sin(X[:, 1])
    else:
        y = np.abs(X).sum(axis=1) + (X[:, 0] > 0) * X[:, 1]
    y = y + 0.3 * rng.normal(size=n)
    return Dataset(tuple(f"x{i}" for i in range(d)), X, y)


@settings(max_examples=50, derandomize=True, deadline=None, database=None,
          suppress_health_check=[HealthCheck.too_slow])
@given(seed=st.integers(0, 2 ** 31), n=st.integers(40, 90), d=st.integers(2, 6), shape=st.integers(0, 2),
       mask=st.integers(1, 62), normalize=st.booleans())
def _identity_case(seed, n, d, shape, mask, normalize):
    ds = _random_dataset(seed, n, d, shape)
    j = frozenset(i for i in range(d) if mask >> i & 1) or frozenset([0])
    if len(j) == d:
        j = frozenset(list(j)[1:])
    group = GroupSpec(j, frozenset(range(d)) - j)
    split = holdout_split(n, 0.3, seed % 1000)

    r = decompose(ds, split, group, TINY, normalize=normalize)
    assert _rel_ok(r.psi, [r.v_joint, -r.v_j, -r.v_jbar])
    assert _rel_ok(r.psi, [r.interaction_surplus, -r.dep])
    assert _rel_ok(r.dep, [r.cross_pred, r.covariance])
    assert verify_report(report_from_dip([r], ds.feature_names, {})).ok

    loco = loco_dip(ds, kfold_split(n, 2, seed % 1000), TINY, normalize=normalize)
    for fold in list(loco.per_fold) + [loco.entries]:
        for e in fold:
            assert _rel_ok(e.loco, [e.standalone, e.interaction, -e.dependencies])
    assert verify_report(report_from_loco(loco, {})).ok

    sage = sage_dip(ds, split, 4, TINY, normalize=normalize)
    for row in sage.surplus:
        assert _rel_ok(sage.value_full, list(row))
    assert verify_report(report_from_sage(sage, {})).ok

    if d <= 6:
        exact = sage_dip(ds, split, config=TINY, exact=True, normalize=normalize)
        assert _rel_ok(exact.value_full, [e.phi for e in exact])
        assert verify_report(report_from_sage(exact, {})).ok


def test_c5_identity_suite():
    try:
        _identity_case()
    except Exception as e:
        _record(5, False, f"identity violated: {type(e).__name__}: {str(e)[:200]}")
        raise
    _record(5, True, "50 random datasets: DIP, LOCO, SAGE telescoping and exact efficiency (d <= 6) "
                     f"hold to {RTOL:g} relative")


# 6 -- purity of the GGAM residual

def _purity(data, split, bundle):
    """Share of Var(Y) that either group alone recovers from the GGAM residual, on test rows."""
    train, test = data.rows(split.train_idx), data.rows(split.test_idx)
    r_train = train.y - predict(bundle.ggam, train)
    r_test = test.y - predict(bundle.ggam, test)
    var_y = float(np.var(test.y))
    out = []
    for g in (bundle.group.group_j, bundle.group.group_jbar):
        m, _ = fit_boosted(Dataset(train.feature_names, train.X, r_train), sorted(g), LearnerConfig())
        pred = predict(m, Dataset(test.feature_names, test.X, r_test))
        explained = np.mean((r_test - r_train.mean()) ** 2) - np.mean((r_test - pred) ** 2)
        out.append(float(explained / var_y))
    return out


def test_c6_purity(large_fits):
    worst, parts = 0.0, []
    for name in ORACLE_DGPS:
        data, split, bundle, _ = large_fits.get(name)
        p = _purity(data, split, bundle)
        worst = max(worst, *p)
        parts.append(f"{name} {max(p):+.4f}")
    ok = worst < 0.01
    _record(6, ok, f"max share of Var(Y) explained by one group on the GGAM residual {worst:.4f} < 0.01 "
                   f"[{'; '.join(parts)}]")
    assert ok


# 7 -- quadratic trio

def test_c7_quadratic_trio(large_fits):
    ok, parts, triples = True, [], []
    for which in (1, 2, 3):
        r = large_fits.get(f"quadratic-{which}")[3].as_normalized()
        mc = syn.monte_carlo_quadratic(syn.QUADRATIC_TRIO[which]).normalized()
        values = (r.v_j, r.v_jbar, r.v_joint)
        triple = (r.interaction_surplus, r.cross_pred, r.covariance)
        ok &= _within(values, (0.7, 0.3, 1.0), 0.03)
        ok &= _within(triple, (mc["int"], mc["cp"], mc["co"]), 0.03)
        triples.append(np.array(triple))
        parts.append(f"Q{which} v {_fmt(values)} (Int, CP, CO) {_fmt(triple)} "
                     f"MC {_fmt((mc['int'], mc['cp'], mc['co']))}")
    sep = min(float(np.max(np.abs(triples[a] - triples[b]))) for a in range(3) for b in range(a + 1, 3))
    ok &= sep > 0.05
    _record(7, ok, "; ".join(parts) + f"; min pairwise separation {sep:.4f} > 0.05")
    assert ok


# 8 -- real-data smoke on the wine quality table

def _wine_path():
    p = os.environ.get(WINE_ENV)
    return p if p and os.path.isfile(p) else None


def test_c8_wine_smoke():
    path = _wine_path()
    if path is None:
        line = (f"CRITERION 8: NOT RUN (skipped) - wine CSV unavailable; set {WINE_ENV} to a "
                "comma-separated file with target column 'quality'")
        ACCEPTANCE_LINES[8] = line
        print(line)
        pytest.skip(f"{WINE_ENV} not set")
    data = load_csv(path, "quality", categorical=[c for c in ("type",) if _has_column(path, c)])
    loco = loco_dip(data, kfold_split(data.n_rows, 10, SEED), LearnerConfig(), normalize=True)
    sage = sage_dip(data, holdout_split(data.n_rows, 0.2, SEED), 100, LearnerConfig(), normalize=True)
    v_loco = verify_report(report_from_loco(loco, {}))
    v_sage = verify_report(report_from_sage(sage, {}))
    by = {data.feature_names[e.feature]: e for e in loco}
    citric, sugar = by["citric acid"], by["residual sugar"]
    sugar_psi = sugar.interaction - sugar.dependencies
    checks = {
        "verify": v_loco.ok and v_sage.ok,
        "citric standalone > loco": citric.standalone > citric.loco,
        "citric dependencies > 0": citric.dependencies > 0,
        "sugar cooperation > 0": sugar_psi > 0,
        "sugar cooperation > standalone": sugar_psi > sugar.standalone,
    }
    ok = all(checks.values())
    _record(8, ok, ", ".join(f"{k}={v}" for k, v in checks.items()))
    assert ok


def _has_column(path, name):
    with open(path, encoding="utf-8") as fh:
        return name in [c.strip() for c in fh.readline().split(",")]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
