"""Bound reports shared by the packing and bounds modules."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any

HOLDS = "holds"
VIOLATED = "violated"
REPORT_ONLY = "report-only"

CSV_COLUMNS = ["bound_id", "k", "lhs", "rhs", "ratio", "verdict", "constant", "hypotheses", "instance"]


@dataclass
class Check:
    name: str
    passed: bool
    witness: Any = None

    def to_dict(self):
        return {"name": self.name, "passed": bool(self.passed), "witness": _plain(self.witness)}


@dataclass
class BoundReport:
    """One evaluated inequality lhs <= rhs.

    ``ratio`` is lhs divided by the formula without its constant, i.e. the
    measured implied constant. ``rhs`` is None for generic-constant bounds.
    """

    bound_id: str
    k: int
    lhs: float
    rhs: float | None
    ratio: float | None
    constant: float | None
    verdict: str
    checks: list[Check] = field(default_factory=list)
    instance: str = ""
    details: dict = field(default_factory=dict)

    @property
    def hypotheses_hold(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"bound_id": self.bound_id, "instance": self.instance, "k": self.k,
                "lhs": _plain(self.lhs), "rhs": _plain(self.rhs), "ratio": _plain(self.ratio),
                "constant": _plain(self.constant), "verdict": self.verdict,
                "checks": [c.to_dict() for c in self.checks], "details": _plain(self.details)}

    def csv_row(self) -> list[str]:
        hyp = ";".join(f"{c.name}={'pass' if c.passed else 'fail'}" for c in self.checks)
        return [self.bound_id, str(self.k), _fmt(self.lhs), _fmt(self.rhs), _fmt(self.ratio),
                self.verdict, _fmt(self.constant), hyp, self.instance]


def exact_verdict(lhs: float, rhs: float, slack: float) -> str:
    return HOLDS if lhs <= rhs + slack else VIOLATED


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if hasattr(x, "tolist"):
        return x.tolist()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()


def reports_to_json(reports) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2)
