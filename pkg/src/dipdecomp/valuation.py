"""Empirical predictive power on held-out rows."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .learners import Model, predict

log = logging.getLogger(__name__)


class ValuationError(ValueError):
    pass


@dataclass(frozen=True)
class ValueEstimate:
    """``value = baseline_risk - model_risk``; may be negative for a poor model."""

    subset: frozenset
    value: float
    baseline_risk: float
    model_risk: float
    n_test: int


@dataclass(frozen=True)
class Normalizer:
    var_y: float

    def __post_init__(self):
        if not self.var_y > 0:
            raise ValuationError(f"target variance must be positive, got {self.var_y}")

    @classmethod
    def from_rows(cls, data: Dataset, idx) -> "Normalizer":
        idx = _check_idx(idx)
        return cls(float(np.var(data.y[idx])))


def _check_idx(idx) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.intp)
    if idx.size == 0:
        raise ValuationError("empty evaluation index set")
    return idx


def empirical_risk(model: Model, data: Dataset, idx) -> float:
    """Mean squared error of ``model`` over rows ``idx`` of ``data``."""
    idx = _check_idx(idx)
    rows = data.rows(idx)
    return float(np.mean((predict(model, rows) - rows.y) ** 2))


def value(model_s: Model, baseline: Model, data: Dataset, test_idx) -> ValueEstimate:
    """Drop in test risk from the train-mean baseline to ``model_s``."""
    idx = _check_idx(test_idx)
    base = empirical_risk(baseline, data, idx)
    risk = base if model_s is baseline else empirical_risk(model_s, data, idx)
    return ValueEstimate(
        subset=frozenset(model_s.feature_scope),
        value=base - risk,
        baseline_risk=base,
        model_risk=risk,
        n_test=int(idx.size),
    )


def normalize(estimate: ValueEstimate | float, norm: Normalizer) -> float:
    v = estimate.value if isinstance(estimate, ValueEstimate) else float(estimate)
    return v / norm.var_y


def check_monotone(v_small: float, v_large: float, var_y: float, tol: float = 0.05) -> bool:
    """Warn when adding features loses more than ``tol`` of the target variance.

    Finite-sample fits are not guaranteed monotone, so this only logs.
    """
    ok = v_large >= v_small - tol * var_y
    if not ok:
        log.warning("value dropped from %.4g to %.4g after adding features", v_small, v_large)
    return ok
