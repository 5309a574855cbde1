"""Small helpers shared by the demo scripts."""

import argparse

from dipdecomp.data import GroupSpec, holdout_split
from dipdecomp.dip import decompose
from dipdecomp.learners import LearnerConfig

TWO_GROUPS = GroupSpec(frozenset([0]), frozenset([1]))
ROW = "{:<22s}" + "{:>9s}" * 8
HEADER = ROW.format("", "v1", "v2", "v12", "Int", "Dep", "CP", "CO", "psi")


def parser(description, n=20000):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--n", type=int, default=n, help=f"rows to simulate (default {n})")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--rounds", type=int, default=LearnerConfig.rounds)
    return p


def fit_two(data, seed, rounds, normalize=True):
    split = holdout_split(data.n_rows, 0.2, seed)
    return decompose(data, split, TWO_GROUPS, LearnerConfig(rounds=rounds, seed=seed), normalize=normalize)


def row(label, vals):
    return ROW.format(label, *(f"{v:+.3f}" for v in vals))


def estimate_row(label, r):
    return row(label, (r.v_j, r.v_jbar, r.v_joint, r.interaction_surplus, r.dep, r.cross_pred,
                       r.covariance, r.psi))


def oracle_row(label, o, normalize=True):
    d = o.normalized() if normalize else {k: getattr(o, k) for k in
                                          ("v_j", "v_jbar", "v_joint", "int", "dep", "cp", "co", "psi")}
    return row(label, (d["v_j"], d["v_jbar"], d["v_joint"], d["int"], d["dep"], d["cp"], d["co"], d["psi"]))
