"""Machine-readable reports and their re-verification.

A report file is a JSON object with three keys:

``body``
    everything computed: schema version, command, config echo, feature
    names, per-entry records and the raw per-fold / per-ordering numbers.
``checksum``
    SHA-256 of the canonical rendering of ``body`` (sorted keys, no
    whitespace). Same inputs and seed give a byte-identical body.
``created_at``
    UTC timestamp; outside the body so it does not affect the checksum.

Floats are written with Python's shortest round-trip repr, so parsing a
report gives back exactly the numbers that were written.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .attribution import LOCO_FIELDS, LocoResult, SageResult
from .dip import VALUE_FIELDS, DipResult, result_to_dict

SCHEMA_VERSION = "1.0"
KINDS = ("decompose", "pairwise", "loco", "sage")
SAGE_FIELDS = ("phi", "standalone", "avg_interaction", "avg_dependencies", "std_err")
IDENTITY_RTOL = 1e-9


class ReportError(ValueError):
    pass


@dataclass
class Report:
    kind: str
    config: dict
    feature_names: list
    normalized: bool
    entries: list
    raw: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def body(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "kind": self.kind,
            "config": self.config,
            "feature_names": list(self.feature_names),
            "normalized": self.normalized,
            "entries": self.entries,
            "raw": self.raw,
        }

    @classmethod
    def from_body(cls, body: dict) -> "Report":
        try:
            return cls(
                kind=body["kind"],
                config=body["config"],
                feature_names=body["feature_names"],
                normalized=body["normalized"],
                entries=body["entries"],
                raw=body.get("raw", {}),
                schema_version=body["schema_version"],
            )
        except (KeyError, TypeError) as e:
            raise ReportError(f"malformed report body: missing {e}") from None


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def checksum(body: dict) -> str:
    return hashlib.sha256(canonical_json(body).encode("utf-8")).hexdigest()


# -- building -----------------------------------------------------------------

def _floats(a) -> list:
    return np.asarray(a, dtype=np.float64).tolist()


def report_from_dip(results, feature_names, config: dict, kind: str = "decompose",
                    labels=None) -> Report:
    """Report for one or more DipResults (``decompose`` or ``pairwise``)."""
    results = list(results)
    if not results:
        raise ReportError("no results to report")
    entries = []
    for i, res in enumerate(results):
        e = result_to_dict(res)
        e["label"] = labels[i] if labels else "|".join(
            ",".join(feature_names[k] for k in sorted(g)) for g in (res.group.group_j, res.group.group_jbar)
        )
        entries.append(e)
    normalized = all(r.normalized for r in results)
    return Report(kind, config, list(feature_names), normalized, entries)


def report_from_loco(res: LocoResult, config: dict) -> Report:
    def rec(e):
        d = {k: getattr(e, k) for k in LOCO_FIELDS}
        d["feature"] = e.feature
        d["label"] = res.feature_names[e.feature]
        return d

    raw = {
        "folds": [[rec(e) for e in fold] for fold in res.per_fold],
        "fold_var_y": list(res.fold_var_y),
    }
    return Report("loco", config, list(res.feature_names), res.normalized,
                  [rec(e) for e in res.entries], raw)


def report_from_sage(res: SageResult, config: dict) -> Report:
    entries = []
    for e in res.entries:
        d = {k: getattr(e, k) for k in SAGE_FIELDS}
        d.update(feature=e.feature, n_orderings=e.n_orderings, label=res.feature_names[e.feature])
        entries.append(d)
    raw = {
        "value_full": res.value_full,
        "var_y": res.var_y,
        "exact": res.exact,
        "orderings": res.orderings.tolist(),
        "surplus": _floats(res.surplus),
        "interaction": _floats(res.interaction),
        "dependencies": _floats(res.dependencies),
    }
    return Report("sage", config, list(res.feature_names), res.normalized, entries, raw)


# -- files --------------------------------------------------------------------

def atomic_write_text(path, text: str):
    """Write to a temporary file beside ``path`` and rename it into place."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps_report(report: Report, created_at: str | None = None) -> str:
    body = report.body()
    if created_at is None:
        created_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
    doc = {"body": body, "checksum": checksum(body), "created_at": created_at}
    return json.dumps(doc, sort_keys=True, indent=1, allow_nan=False) + "\n"


def write_report(report: Report, path) -> None:
    atomic_write_text(path, dumps_report(report))


def parse_report(text: str) -> tuple[Report, str | None, bool]:
    """Return ``(report, stored_checksum, checksum_ok)``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ReportError(f"report is not valid JSON: {e}") from None
    if not isinstance(doc, dict) or "body" not in doc:
        raise ReportError("report has no 'body'")
    stored = doc.get("checksum")
    try:
        ok = stored == checksum(doc["body"])
    except (TypeError, ValueError):
        ok = False
    return Report.from_body(doc["body"]), stored, ok


def read_report(path) -> tuple[Report, str | None, bool]:
    with open(path, encoding="utf-8") as fh:
        return parse_report(fh.read())


# -- verification -------------------------------------------------------------

@dataclass
class Verification:
    violations: list
    checksum_ok: bool | None = None

    @property
    def ok(self) -> bool:
        return not self.violations and self.checksum_ok is not False


def _close(lhs: float, terms, rtol: float = IDENTITY_RTOL) -> bool:
    rhs = sum(terms)
    scale = max([abs(lhs)] + [abs(t) for t in terms])
    return abs(lhs - rhs) <= rtol * scale + 1e-300


def _num(rec: dict, key: str, where: str, out: list):
    v = rec.get(key) if isinstance(rec, dict) else None
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        out.append(f"{where}: field '{key}' missing or not a finite number")
        return None
    return float(v)


def _fields(rec, keys, where, out):
    vals = {k: _num(rec, k, where, out) for k in keys}
    return None if any(v is None for v in vals.values()) else vals


def _check_dip(rec, where, out):
    v = _fields(rec, VALUE_FIELDS, where, out)
    if v is None:
        return
    if not _close(v["psi"], [v["v_joint"], -v["v_j"], -v["v_jbar"]]):
        out.append(f"{where}: psi != v_joint - v_j - v_jbar")
    if not _close(v["psi"], [v["interaction_surplus"], -v["dep"]]):
        out.append(f"{where}: psi != interaction_surplus - dep")
    if not _close(v["dep"], [v["cross_pred"], v["covariance"]]):
        out.append(f"{where}: dep != cross_pred + covariance")


def _check_loco(rec, where, out):
    v = _fields(rec, LOCO_FIELDS, where, out)
    if v is None:
        return None
    if not _close(v["loco"], [v["standalone"], v["interaction"], -v["dependencies"]]):
        out.append(f"{where}: loco != standalone + interaction - dependencies")
    if not _close(v["dependencies"], [v["cross_pred"], v["covariance"]]):
        out.append(f"{where}: dependencies != cross_pred + covariance")
    return v


def _check_mean(value, column, where, name, out):
    if column and not _close(value * len(column), list(column)):
        out.append(f"{where}: {name} is not the mean of its raw values")


def _verify_loco(report: Report, out: list):
    folds = report.raw.get("folds", [])
    for i, fold in enumerate(folds):
        for k, rec in enumerate(fold):
            _check_loco(rec, f"fold {i} entry {k}", out)
    for k, rec in enumerate(report.entries):
        v = _check_loco(rec, f"entry {k}", out)
        if v is None:
            continue
        for name in LOCO_FIELDS:
            col = [f[k].get(name) for f in folds if k < len(f)]
            if all(isinstance(c, (int, float)) for c in col):
                _check_mean(v[name], col, f"entry {k}", name, out)


def _verify_sage(report: Report, out: list):
    raw = report.raw
    vfull = _num(raw, "value_full", "raw", out)
    phis = []
    for k, rec in enumerate(report.entries):
        v = _fields(rec, SAGE_FIELDS, f"entry {k}", out)
        if v is None:
            continue
        phis.append(v["phi"])
        if not _close(v["phi"], [v["standalone"], v["avg_interaction"], -v["avg_dependencies"]]):
            out.append(f"entry {k}: phi != standalone + avg_interaction - avg_dependencies")
        for name, key in (("phi", "surplus"), ("avg_interaction", "interaction"),
                          ("avg_dependencies", "dependencies")):
            rows = raw.get(key) or []
            col = [r[k] for r in rows if k < len(r)]
            _check_mean(v[name], col, f"entry {k}", name, out)
    if vfull is None:
        return
    if len(phis) == len(report.entries) and not _close(vfull, phis):
        out.append("efficiency: sum of phi != value_full")
    for o, row in enumerate(raw.get("surplus") or []):
        if not _close(vfull, list(row)):
            out.append(f"ordering {o}: surpluses do not telescope to value_full")


def verify_report(report: Report, checksum_ok: bool | None = None) -> Verification:
    """Re-check schema and every additivity identity from the stored numbers."""
    out = []
    if report.schema_version != SCHEMA_VERSION:
        out.append(f"schema version mismatch: got {report.schema_version!r}, expected {SCHEMA_VERSION!r}")
    if report.kind not in KINDS:
        out.append(f"unknown report kind {report.kind!r}")
    if not isinstance(report.entries, list) or not report.entries:
        out.append("report has no entries")
        return Verification(out, checksum_ok)
    if report.kind in ("decompose", "pairwise"):
        for k, rec in enumerate(report.entries):
            _check_dip(rec, f"entry {k}", out)
    elif report.kind == "loco":
        _verify_loco(report, out)
    elif report.kind == "sage":
        _verify_sage(report, out)
    return Verification(out, checksum_ok)


# -- plotting adapter ---------------------------------------------------------

@dataclass(frozen=True)
class BarSpec:
    """One forceplot column: the score and its signed parts."""

    label: str
    standalone: float
    interaction: float
    dependencies: float
    score: float
    cross_pred: float | None = None
    covariance: float | None = None


def bar_specs(report: Report) -> list:
    specs = []
    for rec in report.entries:
        if report.kind in ("decompose", "pairwise"):
            specs.append(BarSpec(rec.get("label", ""), rec["v_j"] + rec["v_jbar"],
                                 rec["interaction_surplus"], rec["dep"], rec["v_joint"],
                                 rec["cross_pred"], rec["covariance"]))
        elif report.kind == "loco":
            specs.append(BarSpec(rec.get("label", ""), rec["standalone"], rec["interaction"],
                                 rec["dependencies"], rec["loco"], rec["cross_pred"], rec["covariance"]))
        elif report.kind == "sage":
            specs.append(BarSpec(rec.get("label", ""), rec["standalone"], rec["avg_interaction"],
                                 rec["avg_dependencies"], rec["phi"]))
        else:
            raise ReportError(f"cannot plot report kind {report.kind!r}")
    return specs
