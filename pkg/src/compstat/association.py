"""Association coefficients for the 2x2 compression table.

V uses the usual product of the four margins in its denominator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import stats

from compstat.errors import UndefinedResultError
from compstat.homogeneity import ContingencyTable


def yule_q(table: ContingencyTable) -> float:
    a, b, c, d = table.cells()
    denom = a * d + b * c
    if denom == 0:
        raise UndefinedResultError("Yule's Q undefined: both cross products are zero")
    return (a * d - b * c) / denom


def coefficient_v(table: ContingencyTable) -> float:
    a, b, c, d = table.cells()
    margins = (a + b) * (c + d) * (a + c) * (b + d)
    if margins == 0:
        raise UndefinedResultError("V undefined: a row or column margin is zero")
    return (a * d - b * c) / math.sqrt(margins)


def _clamp(lo, hi):
    return max(-1.0, lo), min(1.0, hi)


def se_q(table: ContingencyTable) -> float:
    """Yule's large-sample standard error.

    A zero cell makes ``|Q| = 1``; the ``1 - Q**2`` factor then wins and the
    SE is 0 (``associate`` flags this, since the interval is degenerate).
    """
    a, b, c, d = table.cells()
    q = yule_q(table)
    if min(a, b, c, d) == 0:
        return 0.0
    return 0.5 * (1.0 - q * q) * math.sqrt(1 / a + 1 / b + 1 / c + 1 / d)


def se_v(table: ContingencyTable) -> float:
    v = coefficient_v(table)
    n = sum(table.cells())
    return math.sqrt(max(0.0, 1.0 - v * v) / n)


@dataclass(frozen=True)
class AssociationReport:
    table: ContingencyTable
    q: float | None
    v: float | None
    se_q: float | None
    se_v: float | None
    ci_q: tuple | None
    ci_v: tuple | None
    confidence: float = 0.95
    notes: tuple = ()

    def to_dict(self) -> dict:
        return {
            "table": self.table.to_dict(),
            "q": self.q,
            "v": self.v,
            "se_q": self.se_q,
            "se_v": self.se_v,
            "ci_q": list(self.ci_q) if self.ci_q is not None else None,
            "ci_v": list(self.ci_v) if self.ci_v is not None else None,
            "confidence": self.confidence,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AssociationReport":
        tup = lambda x: tuple(x) if x is not None else None  # noqa: E731
        return cls(ContingencyTable.from_dict(d["table"]), d["q"], d["v"], d["se_q"], d["se_v"],
                   tup(d["ci_q"]), tup(d["ci_v"]), d["confidence"], tuple(d["notes"]))


def standard_errors(table: ContingencyTable, confidence: float = 0.95):
    """``(se_q, se_v, ci_q, ci_v)``; entries that cannot be computed are ``None``."""
    report = associate(table, confidence)
    return report.se_q, report.se_v, report.ci_q, report.ci_v


def associate(table: ContingencyTable, confidence: float = 0.95) -> AssociationReport:
    """Q and V with standard errors and normal-theory intervals clamped to [-1, 1]."""
    z = float(stats.norm.ppf(0.5 + confidence / 2))
    notes = []
    q = v = sq = sv = ci_q = ci_v = None
    try:
        q = yule_q(table)
    except UndefinedResultError as exc:
        notes.append(str(exc))
    try:
        v = coefficient_v(table)
        sv = se_v(table)
        ci_v = _clamp(v - z * sv, v + z * sv)
    except UndefinedResultError as exc:
        notes.append(str(exc))
    if q is not None:
        sq = se_q(table)
        ci_q = _clamp(q - z * sq, q + z * sq)
        if min(table.cells()) == 0:
            notes.append("zero cell: |Q| = 1 and its large-sample SE degenerates to 0")
    return AssociationReport(table, q, v, sq, sv, ci_q, ci_v, confidence, tuple(notes))
