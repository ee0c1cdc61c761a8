"""Compression-based homogeneity test for groups of sequences.

Half of each group is concatenated into a reference; every held-out sequence
is scored by how many more bits it needs after the other group's reference
than after its own.  The signs of those scores fill a 2x2 (or s x s)
contingency table, which goes to a classical independence test.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence as _Seq

import numpy as np
from scipy import stats

from compstat.codecs import CompressorSpec, Sequence, check_same_alphabet, concat, condition_on
from compstat.errors import DomainError

MIN_EXPECTED = 5.0
LENGTH_RATIO_LIMIT = 100.0


class Decision(str, enum.Enum):
    REJECT_H0 = "REJECT_H0"
    RETAIN_H0 = "RETAIN_H0"


class Method(str, enum.Enum):
    CHI_SQUARE_YATES = "CHI_SQUARE_YATES"
    CHI_SQUARE = "CHI_SQUARE"
    FISHER_EXACT = "FISHER_EXACT"
    CHI_SQUARE_SXS = "CHI_SQUARE_SXS"


@dataclass(frozen=True)
class SampleGroup:
    label: str
    sequences: tuple

    def __post_init__(self):
        seqs = tuple(self.sequences)
        object.__setattr__(self, "sequences", seqs)
        if not seqs:
            raise DomainError(f"group {self.label!r} has no sequences")
        if any(len(s) == 0 for s in seqs):
            raise DomainError(f"group {self.label!r} contains an empty sequence")
        check_same_alphabet(*seqs)

    @property
    def alphabet(self):
        return self.sequences[0].alphabet

    def __len__(self):
        return len(self.sequences)


@dataclass(frozen=True)
class SplitPlan:
    """``policy`` is ``"first"`` (leading half as reference) or ``"random"`` (seeded)."""

    policy: str = "first"
    seed: int | None = None

    def __post_init__(self):
        if self.policy not in ("first", "random"):
            raise DomainError(f"unknown split policy {self.policy!r}")
        if self.policy == "random" and self.seed is None:
            raise DomainError("random split needs a seed")

    def indices(self, k: int, salt: int = 0) -> tuple[list[int], list[int]]:
        half = k // 2
        if self.policy == "first":
            ref = list(range(half))
        else:
            rng = np.random.default_rng([self.seed, salt])
            ref = sorted(rng.permutation(k)[:half].tolist())
        chosen = set(ref)
        return ref, [i for i in range(k) if i not in chosen]


@dataclass(frozen=True)
class ContingencyTable:
    counts: tuple
    row_labels: tuple = ()
    col_labels: tuple = ()

    def __post_init__(self):
        arr = np.asarray(self.counts)
        if arr.ndim != 2 or arr.size == 0:
            raise DomainError("contingency table must be a nonempty 2-D array")
        if (arr < 0).any() or not np.array_equal(arr, np.round(arr)):
            raise DomainError("contingency table entries must be nonnegative integers")
        object.__setattr__(self, "counts", tuple(tuple(int(v) for v in row) for row in arr))

    @classmethod
    def of(cls, n11, n12, n21, n22, **labels) -> "ContingencyTable":
        return cls(((n11, n12), (n21, n22)), **labels)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.counts, dtype=np.int64)

    @property
    def shape(self):
        return self.array.shape

    def cells(self) -> tuple[int, int, int, int]:
        if self.shape != (2, 2):
            raise DomainError("expected a 2x2 table")
        (a, b), (c, d) = self.counts
        return a, b, c, d

    def transpose(self) -> "ContingencyTable":
        return ContingencyTable(self.array.T, self.col_labels, self.row_labels)

    def to_dict(self) -> dict:
        return {"counts": [list(r) for r in self.counts],
                "row_labels": list(self.row_labels), "col_labels": list(self.col_labels)}

    @classmethod
    def from_dict(cls, d: dict) -> "ContingencyTable":
        return cls(d["counts"], tuple(d.get("row_labels", ())), tuple(d.get("col_labels", ())))


@dataclass(frozen=True)
class TestReport:
    table: ContingencyTable
    statistic: float | None
    p_value: float
    alpha: float
    method: Method
    decision: Decision = field(init=False)
    requirement_warnings: tuple = ()
    gammas: tuple = ()
    deltas: tuple = ()

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)")
        if not 0.0 <= self.p_value <= 1.0:
            raise DomainError(f"p-value {self.p_value} outside [0, 1]")
        decision = Decision.REJECT_H0 if self.p_value < self.alpha else Decision.RETAIN_H0
        object.__setattr__(self, "decision", decision)
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "requirement_warnings", tuple(self.requirement_warnings))
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))

    def with_scores(self, gammas, deltas, warnings=()) -> "TestReport":
        return TestReport(self.table, self.statistic, self.p_value, self.alpha, self.method,
                          self.requirement_warnings + tuple(warnings), gammas, deltas)

    def to_dict(self) -> dict:
        return {
            "table": self.table.to_dict(),
            "statistic": self.statistic,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "decision": self.decision.value,
            "method": self.method.value,
            "requirement_warnings": list(self.requirement_warnings),
            "gammas": list(self.gammas),
            "deltas": list(self.deltas),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TestReport":
        return cls(ContingencyTable.from_dict(d["table"]), d["statistic"], d["p_value"], d["alpha"],
                   Method(d["method"]), tuple(d["requirement_warnings"]), tuple(d["gammas"]), tuple(d["deltas"]))


def split(group: SampleGroup, plan: SplitPlan = SplitPlan(), salt: int = 0) -> tuple[Sequence, list[Sequence]]:
    """Reference (concatenation of ``floor(k/2)`` sequences, in index order) and held-out list."""
    if len(group) < 2:
        raise DomainError(f"group {group.label!r} needs at least 2 sequences to split")
    ref_idx, held_idx = plan.indices(len(group), salt)
    reference = concat([group.sequences[i] for i in ref_idx])
    return reference, [group.sequences[i] for i in held_idx]


def _map(fn, items, threads):
    if threads and threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _score(heldout, own_ref, other_ref, spec, threads):
    if not heldout:
        raise DomainError("no held-out sequences to score")
    own = condition_on(spec, own_ref)
    other = condition_on(spec, other_ref)
    return _map(lambda s: other.length(s) - own.length(s), list(heldout), threads)


def gamma_scores(heldout_x, x_star, y_star, spec: CompressorSpec, threads: int = 1) -> list[float]:
    """``|phi(x/Y*)| - |phi(x/X*)|`` for each held-out x."""
    return _score(heldout_x, x_star, y_star, spec, threads)


def delta_scores(heldout_y, x_star, y_star, spec: CompressorSpec, threads: int = 1) -> list[float]:
    """``|phi(y/X*)| - |phi(y/Y*)|`` for each held-out y."""
    return _score(heldout_y, y_star, x_star, spec, threads)


def build_2x2(gammas, deltas, labels=("X", "Y")) -> ContingencyTable:
    """Sign counts; zero scores count toward the diagonal."""
    if len(gammas) == 0 or len(deltas) == 0:
        raise DomainError("both score lists must be nonempty")
    g = np.asarray(gammas, dtype=float)
    d = np.asarray(deltas, dtype=float)
    n11 = int((g >= 0).sum())
    n22 = int((d >= 0).sum())
    return ContingencyTable.of(n11, len(g) - n11, len(d) - n22, n22,
                               row_labels=tuple(labels), col_labels=tuple(labels))


def _expected(arr: np.ndarray) -> np.ndarray:
    rows = arr.sum(axis=1, keepdims=True)
    cols = arr.sum(axis=0, keepdims=True)
    return rows * cols / arr.sum()


def check_requirements(table: ContingencyTable) -> list[str]:
    """Warnings that make the chi-square approximation doubtful."""
    arr = table.array
    warnings = []
    if arr.sum() == 0:
        return ["empty table"]
    if (arr.sum(axis=1) == 0).any() or (arr.sum(axis=0) == 0).any():
        warnings.append("zero margin: table is degenerate")
    expected = _expected(arr)
    if expected.min() < MIN_EXPECTED:
        warnings.append(f"expected cell count {expected.min():.3g} < {MIN_EXPECTED:g}")
    return warnings


def _degenerate(table, alpha, method):
    return TestReport(table, None, 1.0, alpha, method,
                      ("zero margin: statistic undefined, H0 retained",))


def chi_square_2x2(table: ContingencyTable, alpha: float = 0.05, yates: bool = True) -> TestReport:
    a, b, c, d = table.cells()
    n = a + b + c + d
    if n == 0:
        raise DomainError("table has zero grand total")
    method = Method.CHI_SQUARE_YATES if yates else Method.CHI_SQUARE
    denom = (a + b) * (c + d) * (a + c) * (b + d)
    if denom == 0:
        return _degenerate(table, alpha, method)
    diff = abs(a * d - b * c)
    if yates:
        diff = max(diff - n / 2.0, 0.0)
    statistic = n * diff * diff / denom
    p = float(stats.chi2.sf(statistic, 1))
    return TestReport(table, float(statistic), p, alpha, method)


def _hypergeom_weights(r1: int, r2: int, c1: int) -> dict[int, int]:
    """Unnormalized probabilities ``C(r1,a)C(r2,c1-a)`` keyed by top-left cell."""
    lo, hi = max(0, c1 - r2), min(r1, c1)
    return {a: math.comb(r1, a) * math.comb(r2, c1 - a) for a in range(lo, hi + 1)}


def fisher_exact_2x2(table: ContingencyTable) -> float:
    """Two-sided exact p-value: total probability of tables no more likely than the observed one.

    Computed in exact integer arithmetic, so ties are resolved exactly.
    """
    a, b, c, d = table.cells()
    weights = _hypergeom_weights(a + b, c + d, a + c)
    observed = weights[a]
    total = sum(weights.values())
    tail = sum(w for w in weights.values() if w <= observed)
    return float(Fraction(tail, total))


def fisher_report(table: ContingencyTable, alpha: float = 0.05) -> TestReport:
    a, b, c, d = table.cells()
    odds = None
    if b * c:
        odds = a * d / (b * c)
    return TestReport(table, odds, fisher_exact_2x2(table), alpha, Method.FISHER_EXACT)


def psi_test(table: ContingencyTable, alpha: float = 0.05) -> TestReport:
    """Yates chi-square when its requirements hold, Fisher's exact test otherwise."""
    warnings = check_requirements(table)
    if warnings:
        report = fisher_report(table, alpha)
        return TestReport(report.table, report.statistic, report.p_value, alpha, report.method, tuple(warnings))
    return chi_square_2x2(table, alpha)


def _length_ratio_warnings(*groups: SampleGroup) -> list[str]:
    out = []
    for g in groups:
        lengths = [len(s) for s in g.sequences]
        ratio = max(lengths) / min(lengths)
        if ratio > LENGTH_RATIO_LIMIT:
            out.append(f"group {g.label!r}: max/min sequence length ratio {ratio:.3g} exceeds {LENGTH_RATIO_LIMIT:g}")
    return out


def homogeneity_test(x: SampleGroup, y: SampleGroup, spec: CompressorSpec = CompressorSpec(),
                     alpha: float = 0.05, plan: SplitPlan = SplitPlan(), threads: int = 1) -> TestReport:
    """Two-group test of H0 "both groups come from the same source"."""
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    check_same_alphabet(x.sequences[0], y.sequences[0])
    x_star, x_hat = split(x, plan, salt=0)
    y_star, y_hat = split(y, plan, salt=1)
    gammas = gamma_scores(x_hat, x_star, y_star, spec, threads)
    deltas = delta_scores(y_hat, x_star, y_star, spec, threads)
    table = build_2x2(gammas, deltas, labels=(x.label, y.label))
    report = psi_test(table, alpha)
    if x_star == y_star:
        # Every score is exactly 0 and the tie rule fills the diagonal; the
        # table reflects the boundary convention, not evidence against H0.
        report = TestReport(table, None, 1.0, alpha, report.method,
                            report.requirement_warnings + ("identical reference halves: scores carry no "
                                                           "information, H0 retained",))
    return report.with_scores(gammas, deltas, _length_ratio_warnings(x, y))


def build_sxs(groups: _Seq[SampleGroup], spec: CompressorSpec = CompressorSpec(),
              plan: SplitPlan = SplitPlan(), threads: int = 1) -> ContingencyTable:
    """Cell (i, j): held-out sequences of group i that compress best after reference j."""
    if len(groups) < 2:
        raise DomainError("need at least 2 groups")
    check_same_alphabet(*(g.sequences[0] for g in groups))
    parts = [split(g, plan, salt=i) for i, g in enumerate(groups)]
    conditioners = [condition_on(spec, ref) for ref, _ in parts]
    s = len(groups)
    counts = np.zeros((s, s), dtype=np.int64)
    for i, (_, heldout) in enumerate(parts):
        lengths = _map(lambda seq: [c.length(seq) for c in conditioners], heldout, threads)
        for row in lengths:
            counts[i, int(np.argmin(row))] += 1  # argmin takes the lowest index on ties
    labels = tuple(g.label for g in groups)
    return ContingencyTable(counts, labels, labels)


def chi_square_sxs(table: ContingencyTable, alpha: float = 0.05) -> TestReport:
    """Pearson chi-square homogeneity test with ``(s-1)**2`` degrees of freedom."""
    arr = table.array.astype(float)
    r, c = arr.shape
    if r < 2 or c < 2:
        raise DomainError("need at least a 2x2 table")
    if arr.sum() == 0 or (arr.sum(axis=0) == 0).any() or (arr.sum(axis=1) == 0).any():
        return _degenerate(table, alpha, Method.CHI_SQUARE_SXS)
    expected = _expected(arr)
    statistic = float(((arr - expected) ** 2 / expected).sum())
    p = float(stats.chi2.sf(statistic, (r - 1) * (c - 1)))
    warnings = [w for w in check_requirements(table) if w.startswith("expected")]
    return TestReport(table, statistic, p, alpha, Method.CHI_SQUARE_SXS, tuple(warnings))


def homogeneity_test_multi(groups: _Seq[SampleGroup], spec: CompressorSpec = CompressorSpec(),
                           alpha: float = 0.05, plan: SplitPlan = SplitPlan(), threads: int = 1) -> TestReport:
    table = build_sxs(groups, spec, plan, threads)
    report = chi_square_sxs(table, alpha)
    return report.with_scores((), (), _length_ratio_warnings(*groups))
