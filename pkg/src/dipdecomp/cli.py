"""Command-line front end.

Subcommands::

    dipdecomp decompose (--data CSV --target COL | --example NAME) --group-a x1[,x2] [--group-b ...]
    dipdecomp loco      (...) [--folds 10]
    dipdecomp sage      (...) [--orderings 100 | --exact]
    dipdecomp pairwise  (...) --focus NAME
    dipdecomp example   --example NAME --out data.csv
    dipdecomp verify    REPORT.json

Scores are normalized by the test-target variance unless ``--raw`` is given.
Exit status: 0 ok, 1 usage/config error, 2 I/O or parse error, 3 numerical
failure (including a report that fails verification).
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import synthetic
from .attribution import AttributionError, default_threads, loco_dip, pairwise_dip, sage_dip
from .data import DataError, Dataset, GroupSpec, holdout_split, kfold_split, load_csv, project, write_csv
from .dip import decompose
from .forceplot import render_forceplot
from .learners import FitError, LearnerConfig
from .report import (
    Report,
    ReportError,
    dumps_report,
    read_report,
    report_from_dip,
    report_from_loco,
    report_from_sage,
    verify_report,
    write_report,
)
from .valuation import ValuationError

log = logging.getLogger("dipdecomp")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3
COMMANDS = ("decompose", "loco", "sage", "pairwise", "example")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    data: str | None = None
    example: str | None = None
    target: str = "y"
    categorical: tuple = ()
    n: int = 10000
    c: float | None = None
    beta: float | None = None
    group_a: tuple = ()
    group_b: tuple = ()
    focus: str | None = None
    folds: int = 10
    test_fraction: float = 0.2
    orderings: int = 100
    exact: bool = False
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    seed: int = 0
    normalize: bool = True
    out: str | None = None
    svg: str | None = None
    threads: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if (self.data is None) == (self.example is None):
            raise UsageError("give exactly one of --data or --example")
        if set(self.group_a) & set(self.group_b):
            raise UsageError("--group-a and --group-b overlap")
        if self.command == "example" and not self.out:
            raise UsageError("example needs --out")

    def echo(self) -> dict:
        """Config as recorded in the report (output paths excluded)."""
        d = asdict(self)
        for k in ("out", "svg", "threads"):
            d.pop(k)
        d["categorical"] = list(self.categorical)
        d["group_a"] = list(self.group_a)
        d["group_b"] = list(self.group_b)
        return d


def _load(cfg: RunConfig) -> Dataset:
    if cfg.data is not None:
        return load_csv(cfg.data, cfg.target, cfg.categorical)
    if cfg.example not in synthetic.EXAMPLES:
        raise UsageError(f"unknown example {cfg.example!r}; choose from {', '.join(synthetic.EXAMPLES)}")
    if cfg.n < 2:
        raise UsageError("--n must be >= 2")
    return synthetic.make_example(cfg.example, cfg.n, cfg.seed, c=cfg.c, beta=cfg.beta)


def _indices(data: Dataset, names) -> list:
    missing = [n for n in names if n not in data.feature_names]
    if missing:
        raise UsageError(f"unknown feature(s) {missing}; have {list(data.feature_names)}")
    return data.index_of(names)


def _decompose(cfg: RunConfig, data: Dataset) -> Report:
    if not cfg.group_a:
        raise UsageError("decompose needs --group-a")
    a = _indices(data, cfg.group_a)
    b = _indices(data, cfg.group_b) if cfg.group_b else [i for i in range(data.n_features) if i not in a]
    if not b:
        raise UsageError("group B is empty")
    keep = sorted(a + b)
    sub = project(data, keep)
    group = GroupSpec(frozenset(keep.index(i) for i in a), frozenset(keep.index(i) for i in b))
    split = holdout_split(sub.n_rows, cfg.test_fraction, cfg.seed)
    res = decompose(sub, split, group, cfg.learner, normalize=cfg.normalize)
    return report_from_dip([res], sub.feature_names, cfg.echo())


def run(cfg: RunConfig) -> Report | None:
    """Execute one command; writes the report/CSV/SVG files it names."""
    data = _load(cfg)
    if cfg.command == "example":
        write_csv(data, cfg.out, target_name=cfg.target)
        return None
    if cfg.command == "decompose":
        report = _decompose(cfg, data)
    elif cfg.command == "loco":
        folds = kfold_split(data.n_rows, cfg.folds, cfg.seed)
        res = loco_dip(data, folds, cfg.learner, normalize=cfg.normalize, n_jobs=cfg.threads)
        report = report_from_loco(res, cfg.echo())
    elif cfg.command == "sage":
        split = holdout_split(data.n_rows, cfg.test_fraction, cfg.seed)
        res = sage_dip(data, split, cfg.orderings, cfg.learner, exact=cfg.exact,
                       normalize=cfg.normalize, n_jobs=cfg.threads)
        report = report_from_sage(res, cfg.echo())
    else:
        if cfg.focus is None:
            raise UsageError("pairwise needs --focus")
        focus = _indices(data, [cfg.focus])[0]
        split = holdout_split(data.n_rows, cfg.test_fraction, cfg.seed)
        cells = pairwise_dip(data, split, focus, cfg.learner, normalize=cfg.normalize, n_jobs=cfg.threads)
        labels = [f"{data.feature_names[a]}|{data.feature_names[b]}" for a, b in (c.pair for c in cells)]
        report = report_from_dip([c.result for c in cells], data.feature_names, cfg.echo(),
                                 kind="pairwise", labels=labels)
        # group indices refer to each two-column projection
        for e, cell in zip(report.entries, cells):
            e["pair"] = list(cell.pair)
    if cfg.out:
        write_report(report, cfg.out)
    else:
        sys.stdout.write(dumps_report(report))
    if cfg.svg:
        render_forceplot(report, cfg.svg)
    return report


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _names(s: str) -> tuple:
    return tuple(x.strip() for x in s.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dipdecomp", description="Decompose predictive power of feature groups.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    src = common.add_argument_group("data source")
    src.add_argument("--data", help="CSV file with a header row")
    src.add_argument("--target", default="y", help="target column name (default: y)")
    src.add_argument("--categorical", type=_names, default=(), help="comma list of categorical columns")
    src.add_argument("--example", help=f"built-in DGP: {', '.join(synthetic.EXAMPLES)}")
    src.add_argument("--n", type=int, default=10000, help="rows to generate for --example")
    src.add_argument("--c", type=float, help="interaction coefficient (gaussian)")
    src.add_argument("--beta", type=float, help="feature correlation (gaussian)")
    src.add_argument("--seed", type=int, default=0)
    lrn = common.add_argument_group("learner")
    lrn.add_argument("--rounds", type=int, default=LearnerConfig.rounds)
    lrn.add_argument("--learning-rate", type=float, default=LearnerConfig.learning_rate)
    lrn.add_argument("--max-depth", type=int, default=LearnerConfig.max_depth)
    lrn.add_argument("--min-leaf", type=int, default=LearnerConfig.min_leaf)
    lrn.add_argument("--n-bins", type=int, default=LearnerConfig.n_bins)
    out = common.add_argument_group("output")
    out.add_argument("--raw", action="store_true", help="report unnormalized values")
    out.add_argument("--out", help="report path (default: stdout); CSV path for 'example'")
    out.add_argument("--svg", help="also write a forceplot SVG here")
    out.add_argument("--threads", type=int, default=None,
                     help="worker threads (default: $DIPDECOMP_THREADS or 1)")

    d = sub.add_parser("decompose", parents=[common], help="DIP for two feature groups")
    d.add_argument("--group-a", type=_names, default=())
    d.add_argument("--group-b", type=_names, default=(), help="default: all other features")
    d.add_argument("--test-fraction", type=float, default=0.2)

    lo = sub.add_parser("loco", parents=[common], help="LOCO scores with DIP split")
    lo.add_argument("--folds", type=int, default=10)

    sa = sub.add_parser("sage", parents=[common], help="Shapley effects with DIP split")
    sa.add_argument("--orderings", type=int, default=100)
    sa.add_argument("--exact", action="store_true", help="enumerate all coalitions (d <= 12)")
    sa.add_argument("--test-fraction", type=float, default=0.2)

    pw = sub.add_parser("pairwise", parents=[common], help="DIP of one feature against each other")
    pw.add_argument("--focus", required=True)
    pw.add_argument("--test-fraction", type=float, default=0.2)

    sub.add_parser("example", parents=[common], help="write a built-in DGP sample to CSV")

    v = sub.add_parser("verify", help="re-check a report's identities and checksum")
    v.add_argument("report")
    return p


def config_from_args(args) -> RunConfig:
    learner = LearnerConfig(rounds=args.rounds, learning_rate=args.learning_rate,
                            max_depth=args.max_depth, min_leaf=args.min_leaf,
                            n_bins=args.n_bins, seed=args.seed)
    try:
        threads = args.threads if args.threads is not None else default_threads()
    except AttributionError as e:
        raise UsageError(str(e)) from None
    if threads < 1:
        raise UsageError("--threads must be >= 1")
    return RunConfig(
        command=args.command, data=args.data, example=args.example, target=args.target,
        categorical=args.categorical, n=args.n, c=args.c, beta=args.beta,
        group_a=getattr(args, "group_a", ()), group_b=getattr(args, "group_b", ()),
        focus=getattr(args, "focus", None), folds=getattr(args, "folds", 10),
        test_fraction=getattr(args, "test_fraction", 0.2),
        orderings=getattr(args, "orderings", 100), exact=getattr(args, "exact", False),
        learner=learner, seed=args.seed, normalize=not args.raw, out=args.out, svg=args.svg,
        threads=threads,
    )


def _verify(path: str) -> int:
    report, _, ok = read_report(path)
    res = verify_report(report, ok)
    if not ok:
        print("checksum mismatch", file=sys.stderr)
    for v in res.violations:
        print(v, file=sys.stderr)
    if res.ok:
        print(f"ok: {len(report.entries)} entries verified")
        return EXIT_OK
    return EXIT_NUMERIC


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if args.command == "verify":
            return _verify(args.report)
        run(config_from_args(args))
        return EXIT_OK
    except UsageError as e:
        print(f"dipdecomp: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, DataError, ReportError) as e:
        print(f"dipdecomp: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (FitError, ValuationError, AttributionError, FloatingPointError, np.linalg.LinAlgError) as e:
        print(f"dipdecomp: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        # remaining ValueErrors come from config validation (LearnerConfig, split sizes, DGP params)
        print(f"dipdecomp: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
