"""Synthetic data-generating processes with exact decomposition oracles.

Three oracle routes are provided and kept independent of the estimators:

* closed forms for bivariate Gaussian features with a quadratic target,
  derived from Isserlis' theorem (:func:`oracle_gaussian`,
  :func:`oracle_quadratic`);
* exhaustive enumeration over a finite joint support, projecting the
  regression function onto groupwise additive functions by weighted least
  squares (:func:`oracle_discrete`, used for the Bernoulli and digit DGPs);
* a Monte Carlo route for the Gaussian quadratics that averages exact
  conditional moments over a large sample (:func:`monte_carlo_quadratic`).

Gaussian sampling draws standard normals from ``numpy.random.default_rng``
(PCG64 bit generator, ziggurat normals) and correlates them with the lower
Cholesky factor of ``[[1, beta], [beta, 1]]``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, GroupSpec

FEATURES = ("x1", "x2")


@dataclass(frozen=True)
class OracleDip:
    """Population decomposition for a DGP (unnormalized)."""

    v_j: float
    v_jbar: float
    v_joint: float
    int: float
    cp: float
    co: float
    dep: float
    psi: float
    var_y: float

    def normalized(self) -> dict:
        return {k: getattr(self, k) / self.var_y
                for k in ("v_j", "v_jbar", "v_joint", "int", "cp", "co", "dep", "psi")}

    def identity_residuals(self) -> dict:
        return {
            "psi": self.psi - (self.v_joint - self.v_j - self.v_jbar),
            "int_minus_dep": self.psi - (self.int - self.dep),
            "dep_split": self.dep - (self.cp + self.co),
        }


# -- Gaussian features --------------------------------------------------------

@dataclass(frozen=True)
class GaussianInteractionParams:
    """``Y = X1 + X2 + c X1 X2`` with unit variances and ``Cov(X1, X2) = beta``."""

    c: float
    beta: float

    def __post_init__(self):
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")


@dataclass(frozen=True)
class QuadraticGaussian:
    """``Y = a1 X1 + a2 X2 + b1 X1^2 + b2 X2^2 + c X1 X2``, Gaussian X as above."""

    a1: float
    a2: float
    b1: float
    b2: float
    c: float
    beta: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")

    def target(self, X: np.ndarray) -> np.ndarray:
        x1, x2 = X[:, 0], X[:, 1]
        return (self.a1 * x1 + self.a2 * x2 + self.b1 * x1 ** 2 + self.b2 * x2 ** 2
                + self.c * x1 * x2)


QUADRATIC_TRIO = {
    1: QuadraticGaussian(-4.3, -0.9, -3.9, 3.0, 0.0),
    2: QuadraticGaussian(-1.3, -4.7, 3.6, -3.0, 4.7),
    3: QuadraticGaussian(10.9, 2.4, -5.1, -5.3, 11.3),
}


def _as_quadratic(params: GaussianInteractionParams) -> QuadraticGaussian:
    return QuadraticGaussian(1.0, 1.0, 0.0, 0.0, params.c, params.beta)


def _gaussian_features(beta: float, n: int, seed: int) -> np.ndarray:
    if n < 2:
        raise ValueError("n must be >= 2")
    L = np.linalg.cholesky(np.array([[1.0, beta], [beta, 1.0]]))
    Z = np.random.default_rng(seed).standard_normal((n, 2))
    return Z @ L.T


def gen_gaussian(params: GaussianInteractionParams, n: int, seed: int = 0) -> Dataset:
    X = _gaussian_features(params.beta, n, seed)
    return Dataset(FEATURES, X, _as_quadratic(params).target(X))


def gen_quadratic(q: QuadraticGaussian, n: int, seed: int = 0) -> Dataset:
    X = _gaussian_features(q.beta, n, seed)
    return Dataset(FEATURES, X, q.target(X))


def gen_quadratic_trio(which: int, n: int, seed: int = 0) -> Dataset:
    if which not in QUADRATIC_TRIO:
        raise ValueError(f"unknown quadratic DGP {which!r}; expected 1, 2 or 3")
    return gen_quadratic(QUADRATIC_TRIO[which], n, seed)


def oracle_gaussian(params: GaussianInteractionParams) -> OracleDip:
    """Closed forms for ``Y = X1 + X2 + c X1 X2``."""
    c, b = params.c, params.beta
    var_y = 2 + 2 * b + c ** 2 * (1 + b ** 2)
    v1 = (1 + b) ** 2 + 2 * c ** 2 * b ** 2
    int_ = c ** 2 * (1 + b ** 2) - 4 * c ** 2 * b ** 2 / (1 + b ** 2)
    cp = 2 * b ** 2 + 4 * c ** 2 * b ** 6 / (1 + b ** 2) ** 2
    co = 2 * (b + 2 * c ** 2 * b ** 4 / (1 + b ** 2) ** 2)
    return OracleDip(v_j=v1, v_jbar=v1, v_joint=var_y, int=int_, cp=cp, co=co,
                     dep=cp + co, psi=var_y - 2 * v1, var_y=var_y)


def quadratic_components(q: QuadraticGaussian) -> tuple[float, float]:
    """Squared-term coefficients of the optimal additive components.

    The projection of ``X1 X2`` onto additive functions of Gaussian
    features with correlation ``beta`` is ``k (X1^2 + X2^2) + const`` with
    ``k = beta / (1 + beta^2)``; the linear and squared terms are already
    additive.
    """
    k = q.beta / (1 + q.beta ** 2)
    return q.b1 + q.c * k, q.b2 + q.c * k


def oracle_quadratic(q: QuadraticGaussian) -> OracleDip:
    """Closed-form decomposition for a Gaussian quadratic target."""
    a1, a2, b1, b2, c, b = q.a1, q.a2, q.b1, q.b2, q.c, q.beta
    q1, q2 = quadratic_components(q)
    # odd moments vanish, so the linear and quadratic parts are uncorrelated
    var_lin = a1 ** 2 + a2 ** 2 + 2 * a1 * a2 * b
    var_quad = (2 * b1 ** 2 + 2 * b2 ** 2 + c ** 2 * (1 + b ** 2)
                + 4 * b1 * b2 * b ** 2 + 4 * b1 * c * b + 4 * b2 * c * b)
    var_y = var_lin + var_quad
    # E(Y | X1) = (a1 + a2 b) X1 + (b1 + b2 b^2 + c b) X1^2 + const
    v1 = (a1 + a2 * b) ** 2 + 2 * (b1 + b2 * b ** 2 + c * b) ** 2
    v2 = (a2 + a1 * b) ** 2 + 2 * (b2 + b1 * b ** 2 + c * b) ** 2
    int_ = c ** 2 * ((1 + b ** 2) - 4 * b ** 2 / (1 + b ** 2))
    # g_i = a_i X_i + q_i X_i^2;  E(g1 | X2) = a1 b X2 + q1 b^2 X2^2 + const
    cp = (a1 * b) ** 2 + 2 * (q1 * b ** 2) ** 2 + (a2 * b) ** 2 + 2 * (q2 * b ** 2) ** 2
    co = 2 * (a1 * a2 * b + 2 * q1 * q2 * b ** 2)
    return OracleDip(v_j=v1, v_jbar=v2, v_joint=var_y, int=int_, cp=cp, co=co,
                     dep=cp + co, psi=var_y - v1 - v2, var_y=var_y)


def monte_carlo_quadratic(q: QuadraticGaussian, n: int = 10 ** 6, seed: int = 12345) -> OracleDip:
    """Sample-average oracle using exact Gaussian conditional moments.

    With ``E(X2 | X1) = beta X1`` and ``E(X2^2 | X1) = 1 - beta^2 + beta^2 X1^2``
    every conditional expectation is available pointwise, so only the outer
    variances are estimated. ``psi``, ``dep`` and ``cp`` are derived from the
    sampled values so that the additivity identities hold exactly.
    """
    X = _gaussian_features(q.beta, n, seed)
    x1, x2, b = X[:, 0], X[:, 1], q.beta
    y = q.target(X)
    e_y_x1 = (q.a1 * x1 + q.a2 * b * x1 + q.b1 * x1 ** 2
              + q.b2 * (1 - b ** 2 + b ** 2 * x1 ** 2) + q.c * b * x1 ** 2)
    e_y_x2 = (q.a2 * x2 + q.a1 * b * x2 + q.b2 * x2 ** 2
              + q.b1 * (1 - b ** 2 + b ** 2 * x2 ** 2) + q.c * b * x2 ** 2)
    q1, q2 = quadratic_components(q)
    g1 = q.a1 * x1 + q1 * x1 ** 2
    g2 = q.a2 * x2 + q2 * x2 ** 2
    h = y - g1 - g2
    var_y, v1, v2 = np.var(y), np.var(e_y_x1), np.var(e_y_x2)
    int_ = np.var(h)
    co = 2 * np.mean((g1 - g1.mean()) * (g2 - g2.mean()))
    psi = var_y - v1 - v2
    dep = int_ - psi
    return OracleDip(v_j=float(v1), v_jbar=float(v2), v_joint=float(var_y), int=float(int_),
                     cp=float(dep - co), co=float(co), dep=float(dep), psi=float(psi),
                     var_y=float(var_y))


def monte_carlo_cross_pred(q: QuadraticGaussian, n: int = 10 ** 6, seed: int = 12345) -> float:
    """Cross-predictability estimated directly from ``E(g1|X2)`` and ``E(g2|X1)``."""
    X = _gaussian_features(q.beta, n, seed)
    x1, x2, b = X[:, 0], X[:, 1], q.beta
    q1, q2 = quadratic_components(q)
    e_g1_x2 = q.a1 * b * x2 + q1 * (1 - b ** 2 + b ** 2 * x2 ** 2)
    e_g2_x1 = q.a2 * b * x1 + q2 * (1 - b ** 2 + b ** 2 * x1 ** 2)
    return float(np.var(e_g1_x2) + np.var(e_g2_x1))


# -- finite supports ----------------------------------------------------------

def _cond_mean(keys: np.ndarray, w: np.ndarray, f: np.ndarray) -> np.ndarray:
    """E(f | key) evaluated at every support point (weights ``w``)."""
    _, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    num = np.bincount(inv, weights=w * f)
    den = np.bincount(inv, weights=w)
    return (num / den)[inv]


def _wvar(w: np.ndarray, f: np.ndarray) -> float:
    m = np.sum(w * f)
    return float(np.sum(w * (f - m) ** 2))


def _indicators(keys: np.ndarray) -> np.ndarray:
    _, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    A = np.zeros((keys.shape[0], inv.max() + 1))
    A[np.arange(keys.shape[0]), inv] = 1.0
    return A


def oracle_discrete(points: np.ndarray, probs: np.ndarray, f: np.ndarray,
                    group: GroupSpec) -> OracleDip:
    """Exact decomposition by enumeration over a finite joint support.

    ``points`` holds the support of X (one row per atom), ``probs`` the atom
    probabilities and ``f`` the regression function ``E(Y | X)`` at each
    atom. The optimal groupwise additive model is the weighted least-squares
    projection of ``f`` onto indicator functions of ``X_J`` plus indicator
    functions of ``X_Jbar``.
    """
    points = np.asarray(points, dtype=np.float64)
    w = np.asarray(probs, dtype=np.float64)
    w = w / w.sum()
    f = np.asarray(f, dtype=np.float64)
    J, Jbar = sorted(group.group_j), sorted(group.group_jbar)
    xj, xjbar = points[:, J], points[:, Jbar]
    var_y = _wvar(w, f)
    v_j = _wvar(w, _cond_mean(xj, w, f))
    v_jbar = _wvar(w, _cond_mean(xjbar, w, f))
    Aj, Ajbar = _indicators(xj), _indicators(xjbar)
    A = np.hstack([Aj, Ajbar])
    sw = np.sqrt(w)
    theta, *_ = np.linalg.lstsq(A * sw[:, None], f * sw, rcond=None)
    gj = Aj @ theta[:Aj.shape[1]]
    gjbar = Ajbar @ theta[Aj.shape[1]:]
    gj = gj - np.sum(w * gj)
    gjbar = gjbar - np.sum(w * gjbar)
    h = f - np.sum(w * f) - gj - gjbar
    int_ = _wvar(w, h)
    co = 2 * float(np.sum(w * gj * gjbar))
    cp = _wvar(w, _cond_mean(xjbar, w, gj)) + _wvar(w, _cond_mean(xj, w, gjbar))
    return OracleDip(v_j=v_j, v_jbar=v_jbar, v_joint=var_y, int=int_, cp=cp, co=co,
                     dep=cp + co, psi=var_y - v_j - v_jbar, var_y=var_y)


@dataclass(frozen=True)
class StudentVariant:
    """Two Ber(0.5) features with ``P(X1 = X2) = p_equal`` and a target rule."""

    name: str
    p_equal: float

    def target(self, x1, x2):
        x1 = np.asarray(x1, dtype=np.float64)
        x2 = np.asarray(x2, dtype=np.float64)
        if self.name == "redundancy":
            return 4 * x1 + 4 * x2
        if self.name == "enhancement":
            return 4 * x1 + 2 * x2
        return 8 * np.logical_or(x1 > 0, x2 > 0) - 1.0

    def support(self):
        """Atoms ``(x1, x2)`` and their probabilities."""
        pts = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=np.float64)
        p = self.p_equal / 2
        probs = np.array([p, 0.5 - p, 0.5 - p, p])
        return pts, probs


STUDENT_VARIANTS = {
    "redundancy": StudentVariant("redundancy", 0.75),
    "enhancement": StudentVariant("enhancement", 0.25),
    "interaction": StudentVariant("interaction", 0.75),
}


def _variant(variant) -> StudentVariant:
    if isinstance(variant, StudentVariant):
        return variant
    try:
        return STUDENT_VARIANTS[variant]
    except KeyError:
        raise ValueError(f"unknown student variant {variant!r}; "
                         f"expected one of {sorted(STUDENT_VARIANTS)}") from None


def gen_student(variant, n: int, seed: int = 0) -> Dataset:
    v = _variant(variant)
    if n < 2:
        raise ValueError("n must be >= 2")
    pts, probs = v.support()
    cells = np.random.default_rng(seed).choice(4, size=n, p=probs)
    X = pts[cells]
    return Dataset(FEATURES, X, v.target(X[:, 0], X[:, 1]))


def oracle_student(variant) -> OracleDip:
    v = _variant(variant)
    pts, probs = v.support()
    return oracle_discrete(pts, probs, v.target(pts[:, 0], pts[:, 1]),
                           GroupSpec(frozenset([0]), frozenset([1])))


def gen_digits(n: int, seed: int = 0) -> Dataset:
    """``X_i = 10 Z0 + Z_i`` and ``Y = Z1 + Z2`` with ``Z_k`` uniform on 0..9."""
    if n < 2:
        raise ValueError("n must be >= 2")
    Z = np.random.default_rng(seed).integers(0, 10, size=(n, 3))
    X = np.column_stack([10 * Z[:, 0] + Z[:, 1], 10 * Z[:, 0] + Z[:, 2]]).astype(np.float64)
    y = (X[:, 0] % 10) + (X[:, 1] % 10)
    return Dataset(FEATURES, X, y)


def digits_support():
    Z = np.array(list(itertools.product(range(10), repeat=3)), dtype=np.float64)
    pts = np.column_stack([10 * Z[:, 0] + Z[:, 1], 10 * Z[:, 0] + Z[:, 2]])
    return pts, np.full(len(Z), 1.0 / len(Z)), Z[:, 1] + Z[:, 2]


def oracle_digits() -> OracleDip:
    pts, probs, f = digits_support()
    return oracle_discrete(pts, probs, f, GroupSpec(frozenset([0]), frozenset([1])))


def digits_correlation() -> float:
    pts, w, _ = digits_support()
    c = np.cov(pts.T, aweights=w, bias=True)
    return float(c[0, 1] / math.sqrt(c[0, 0] * c[1, 1]))


# -- registry -----------------------------------------------------------------

EXAMPLES = (
    "gaussian", "gaussian-dgp1", "gaussian-dgp2",
    "student-redundancy", "student-enhancement", "student-interaction",
    "digits", "quadratic-1", "quadratic-2", "quadratic-3",
)


def make_example(name: str, n: int, seed: int = 0, c: float | None = None,
                 beta: float | None = None) -> Dataset:
    """Generate a named DGP. ``c`` and ``beta`` apply to ``gaussian`` only."""
    if name == "gaussian":
        return gen_gaussian(GaussianInteractionParams(math.sqrt(6) if c is None else c,
                                                      0.5 if beta is None else beta), n, seed)
    if name == "gaussian-dgp1":
        return gen_gaussian(GaussianInteractionParams(0.0, 0.0), n, seed)
    if name == "gaussian-dgp2":
        return gen_gaussian(GaussianInteractionParams(math.sqrt(6), 0.5), n, seed)
    if name.startswith("student-"):
        return gen_student(name[len("student-"):], n, seed)
    if name == "digits":
        return gen_digits(n, seed)
    if name.startswith("quadratic-"):
        return gen_quadratic_trio(int(name[-1]), n, seed)
    raise ValueError(f"unknown example {name!r}; expected one of {', '.join(EXAMPLES)}")


def example_oracle(name: str, c: float | None = None, beta: float | None = None) -> OracleDip:
    if name == "gaussian":
        return oracle_gaussian(GaussianInteractionParams(math.sqrt(6) if c is None else c,
                                                         0.5 if beta is None else beta))
    if name == "gaussian-dgp1":
        return oracle_gaussian(GaussianInteractionParams(0.0, 0.0))
    if name == "gaussian-dgp2":
        return oracle_gaussian(GaussianInteractionParams(math.sqrt(6), 0.5))
    if name.startswith("student-"):
        return oracle_student(name[len("student-"):])
    if name == "digits":
        return oracle_digits()
    if name.startswith("quadratic-"):
        return oracle_quadratic(QUADRATIC_TRIO[int(name[-1])])
    raise ValueError(f"unknown example {name!r}")
