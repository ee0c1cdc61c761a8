"""Nearest-source classification by conditional code length."""
from __future__ import annotations

from dataclasses import dataclass, field

from compstat.codecs import CompressorSpec, Sequence, check_same_alphabet, condition_on
from compstat.errors import DomainError

DEFAULT_RATIO_THRESHOLD = 0.1


@dataclass
class TrainingBank:
    """Labelled reference sequences. Primed compressor states are cached per class."""

    classes: list
    spec: CompressorSpec = field(default_factory=CompressorSpec)

    def __post_init__(self):
        self.classes = [(str(label), ref) for label, ref in self.classes]
        if not self.classes:
            raise DomainError("training bank needs at least one class")
        if any(len(ref) == 0 for _, ref in self.classes):
            raise DomainError("reference sequences must be nonempty")
        check_same_alphabet(*(ref for _, ref in self.classes))
        self._conditioners = None

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self.classes]

    @property
    def alphabet(self):
        return self.classes[0][1].alphabet

    def conditioners(self):
        if self._conditioners is None:
            self._conditioners = [condition_on(self.spec, ref) for _, ref in self.classes]
        return self._conditioners


@dataclass(frozen=True)
class ClassificationResult:
    winner_label: str
    winner_index: int
    scores: tuple
    margin: float | None      # runner-up minus winner, in bits; a heuristic confidence proxy
    length_ratio: float
    ratio_warning: str | None = None

    def to_dict(self) -> dict:
        return {
            "winner_label": self.winner_label,
            "winner_index": self.winner_index,
            "scores": list(self.scores),
            "margin": self.margin,
            "length_ratio": self.length_ratio,
            "ratio_warning": self.ratio_warning,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClassificationResult":
        return cls(d["winner_label"], d["winner_index"], tuple(d["scores"]), d["margin"],
                   d["length_ratio"], d["ratio_warning"])


def check_length_ratio(u: Sequence, bank: TrainingBank,
                       threshold: float = DEFAULT_RATIO_THRESHOLD) -> tuple[float, str | None]:
    """``|u| / min |reference|`` and a warning when it exceeds ``threshold``."""
    ratio = len(u) / min(len(ref) for _, ref in bank.classes)
    warning = None
    if ratio > threshold:
        warning = (f"query/reference length ratio {ratio:.3g} > {threshold:g}: "
                   "references may be too short for a reliable decision")
    return ratio, warning


def classify(u: Sequence, bank: TrainingBank, ratio_threshold: float = DEFAULT_RATIO_THRESHOLD) -> ClassificationResult:
    if len(u) == 0:
        raise DomainError("cannot classify an empty sequence")
    check_same_alphabet(u, bank.classes[0][1])
    scores = tuple(c.length(u) for c in bank.conditioners())
    best = min(range(len(scores)), key=lambda i: (scores[i], i))
    margin = None
    if len(scores) > 1:
        margin = min(s for i, s in enumerate(scores) if i != best) - scores[best]
    ratio, warning = check_length_ratio(u, bank, ratio_threshold)
    return ClassificationResult(bank.labels[best], best, scores, margin, ratio, warning)
