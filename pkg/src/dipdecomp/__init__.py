"""Decomposition of interactions and dependencies (DIP) of feature groups.

The joint predictive power of two feature groups J and Jbar splits as::

    v(J u Jbar) = v(J) + v(Jbar) + Int - (CP + CO)

with ``Int`` the predictive power of pure between-group interactions,
``CP`` the cross-predictability and ``CO`` twice the covariance of the two
groups' main effects. All values are estimated by refitting boosted trees on
a training split and scoring squared error on a held-out split.
"""

from .attribution import (
    LocoEntry,
    LocoResult,
    PairwiseCell,
    SageEntry,
    SageResult,
    loco_dip,
    pairwise_dip,
    sage_dip,
    shapley_weight,
)
from .data import (
    DataError,
    Dataset,
    FoldPlan,
    GroupSpec,
    SplitPlan,
    holdout_split,
    kfold_split,
    load_csv,
    project,
    write_csv,
)
from .dip import DipResult, FitBundle, decompose, decompose_bundle, fit_bundle
from .forceplot import render_forceplot
from .learners import (
    FitError,
    LearnerConfig,
    Model,
    center_components,
    component_values,
    fit_boosted,
    fit_constant,
    fit_ggam,
    predict,
)
from .report import Report, read_report, verify_report, write_report
from .valuation import Normalizer, ValueEstimate, empirical_risk, value

__version__ = "0.1.0"
