import numpy as np
import pytest

from dipdecomp import synthetic as syn
from dipdecomp.data import GroupSpec, holdout_split
from dipdecomp.dip import decompose_bundle, fit_bundle
from dipdecomp.learners import LearnerConfig

N_LARGE = 100_000
SEED = 1
ORACLE_DGPS = (
    "gaussian-dgp1", "gaussian-dgp2",
    "student-redundancy", "student-enhancement", "student-interaction",
    "digits", "quadratic-1", "quadratic-2", "quadratic-3",
)

# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = {}


class LargeFits:
    """n=1e5 fits of the two-feature oracle DGPs, computed on first use."""

    def __init__(self):
        self._cache = {}

    def get(self, name):
        if name not in self._cache:
            data = syn.make_example(name, N_LARGE, seed=SEED)
            split = holdout_split(data.n_rows, 0.2, seed=SEED)
            bundle = fit_bundle(data, split, GroupSpec(frozenset([0]), frozenset([1])), LearnerConfig())
            result = decompose_bundle(bundle, data, split.test_idx)
            self._cache[name] = (data, split, bundle, result)
        return self._cache[name]


@pytest.fixture(scope="session")
def large_fits():
    return LargeFits()


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
