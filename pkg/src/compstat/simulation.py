"""Seeded Monte Carlo experiments on synthetic Markov sources.

Every trial draws its own generator from a seed derived from the master
seed, so results do not depend on thread scheduling and can be reproduced
trial by trial.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from compstat.classify import TrainingBank, classify
from compstat.codecs import CompressorSpec, compress_length, condition_on
from compstat.errors import DomainError
from compstat.homogeneity import Decision, SampleGroup, SplitPlan, homogeneity_test
from compstat.sources import MarkovModel, generate, limit_entropy

CONFIDENCE = 0.99


def trial_seeds(seed: int, n: int, *salt: int) -> list[int]:
    """``n`` independent 64-bit seeds derived from ``(seed, *salt)``."""
    state = np.random.SeedSequence([int(seed), *map(int, salt)]).generate_state(n, dtype=np.uint64)
    return [int(s) for s in state]


def _run(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def wilson_interval(successes: int, n: int, confidence: float = CONFIDENCE) -> tuple[float, float]:
    z = float(stats.norm.ppf(0.5 + confidence / 2))
    p = successes / n
    centre = (p + z * z / (2 * n)) / (1 + z * z / n)
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / (1 + z * z / n)
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class Rate:
    successes: int
    trials: int
    low: float
    high: float

    @property
    def rate(self) -> float:
        return self.successes / self.trials

    @property
    def half_width(self) -> float:
        return (self.high - self.low) / 2

    @classmethod
    def of(cls, successes: int, trials: int, confidence: float = CONFIDENCE) -> "Rate":
        return cls(int(successes), int(trials), *wilson_interval(successes, trials, confidence))

    def to_dict(self) -> dict:
        return {"rate": self.rate, "successes": self.successes, "trials": self.trials,
                "ci": [self.low, self.high], "ci_half_width": self.half_width}


# -- growth of the Delta statistic -------------------------------------------------

@dataclass(frozen=True)
class DeltaGrowthConfig:
    source_x: MarkovModel
    source_y: MarkovModel
    m_grid: tuple = (250, 500, 1000, 2000, 4000)
    context_length: int = 100_000
    trials: int = 200
    spec: CompressorSpec = field(default_factory=lambda: CompressorSpec.ppm(0))
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.trials < 1 or self.context_length < 1 or min(self.m_grid) < 1:
            raise DomainError("trials, lengths and m values must be >= 1")
        if len(self.m_grid) < 2:
            raise DomainError("need at least two values of m to fit a slope")

    def to_dict(self) -> dict:
        return {"experiment": "delta_growth", "source_x": self.source_x.to_dict(),
                "source_y": self.source_y.to_dict(), "m_grid": list(self.m_grid),
                "context_length": self.context_length, "trials": self.trials,
                "spec": self.spec.to_dict(), "seed": self.seed}


@dataclass(frozen=True)
class DeltaGrowthReport:
    m_grid: tuple
    mean_delta: tuple
    sd_delta: tuple
    slope: float
    intercept: float
    slope_se: float
    intercept_se: float
    slope_ci: tuple
    intercept_ci: tuple
    confidence: float
    trials: int
    seed: int

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def fit_line(xs, means, variances, confidence: float = CONFIDENCE):
    """OLS line through group means with the exact sampling variance of the estimates.

    The means are independent, so the OLS slope (a fixed linear combination
    of them) has variance ``sum(c_i**2 * var_i)``; no homoscedasticity is assumed.
    Returns ``(slope, intercept, se_slope, se_intercept)``.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(means, dtype=float)
    v = np.asarray(variances, dtype=float)
    xc = x - x.mean()
    c_slope = xc / (xc @ xc)
    c_icpt = 1.0 / x.size - x.mean() * c_slope
    slope = float(c_slope @ y)
    intercept = float(c_icpt @ y)
    return slope, intercept, float(math.sqrt(c_slope ** 2 @ v)), float(math.sqrt(c_icpt ** 2 @ v))


def _delta_trial(cfg: DeltaGrowthConfig, m: int, seed: int) -> float:
    rng = np.random.default_rng(seed)
    x_ctx = generate(cfg.source_x, cfg.context_length, rng)
    y_ctx = generate(cfg.source_y, cfg.context_length, rng)
    w = generate(cfg.source_x, m, rng)
    return condition_on(cfg.spec, y_ctx).length(w) - condition_on(cfg.spec, x_ctx).length(w)


def delta_growth_experiment(cfg: DeltaGrowthConfig) -> DeltaGrowthReport:
    """Mean Delta over a grid of word lengths m, and a fitted line ``mean ~ slope*m + intercept``."""
    means, sds, variances = [], [], []
    for j, m in enumerate(cfg.m_grid):
        seeds = trial_seeds(cfg.seed, cfg.trials, j)
        deltas = np.array(_run(lambda s: _delta_trial(cfg, m, s), seeds, cfg.threads))
        sd = float(deltas.std(ddof=1)) if deltas.size > 1 else 0.0
        means.append(float(deltas.mean()))
        sds.append(sd)
        variances.append(sd * sd / deltas.size)
    slope, intercept, se_s, se_i = fit_line(cfg.m_grid, means, variances)
    z = float(stats.norm.ppf(0.5 + CONFIDENCE / 2))
    return DeltaGrowthReport(
        tuple(cfg.m_grid), tuple(means), tuple(sds), slope, intercept, se_s, se_i,
        (slope - z * se_s, slope + z * se_s), (intercept - z * se_i, intercept + z * se_i),
        CONFIDENCE, cfg.trials, cfg.seed,
    )


# -- error rates of the homogeneity test and the classifier ------------------------

@dataclass(frozen=True)
class HomogeneityExperimentConfig:
    source_x: MarkovModel
    source_y: MarkovModel
    sequences_per_group: int = 20
    sequence_length: int = 5000
    trials: int = 400
    alpha: float = 0.05
    spec: CompressorSpec = field(default_factory=CompressorSpec)
    split: str = "first"
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.trials < 1 or self.sequence_length < 1 or self.sequences_per_group < 2:
            raise DomainError("need trials >= 1, lengths >= 1 and at least 2 sequences per group")

    def to_dict(self) -> dict:
        return {"experiment": "homogeneity", "source_x": self.source_x.to_dict(),
                "source_y": self.source_y.to_dict(), "sequences_per_group": self.sequences_per_group,
                "sequence_length": self.sequence_length, "trials": self.trials, "alpha": self.alpha,
                "spec": self.spec.to_dict(), "split": self.split, "seed": self.seed}


@dataclass(frozen=True)
class ClassificationExperimentConfig:
    sources: tuple
    reference_length: int = 100_000
    query_lengths: tuple = (250, 1000, 4000)
    trials: int = 500
    spec: CompressorSpec = field(default_factory=CompressorSpec)
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if len(self.sources) < 2:
            raise DomainError("classification needs at least two sources")
        if self.trials < 1 or self.reference_length < 1 or min(self.query_lengths) < 1:
            raise DomainError("trials and lengths must be >= 1")

    def to_dict(self) -> dict:
        return {"experiment": "classification", "sources": [s.to_dict() for s in self.sources],
                "reference_length": self.reference_length, "query_lengths": list(self.query_lengths),
                "trials": self.trials, "spec": self.spec.to_dict(), "seed": self.seed}


@dataclass(frozen=True)
class ErrorRateReport:
    """Empirical error rates with 99% Wilson intervals.

    For homogeneity runs ``rejection`` is the rejection rate; it is the
    Type I rate when both sources are equal and one minus the Type II rate
    otherwise.  For classification runs ``accuracy`` maps query length to
    the share of correct decisions.
    """

    kind: str
    trials: int
    trial_seeds: tuple
    rejection: Rate | None = None
    same_source: bool | None = None
    accuracy: tuple = ()          # ((query_length, Rate), ...)
    confidence: float = CONFIDENCE

    @property
    def type_i_rate(self) -> float | None:
        if self.rejection is None or not self.same_source:
            return None
        return self.rejection.rate

    @property
    def type_ii_rate(self) -> float | None:
        if self.rejection is None or self.same_source:
            return None
        return 1.0 - self.rejection.rate

    def accuracy_at(self, length: int) -> float:
        return dict(self.accuracy)[length].rate

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "trials": self.trials,
            "confidence": self.confidence,
            "same_source": self.same_source,
            "rejection": self.rejection.to_dict() if self.rejection else None,
            "type_i_rate": self.type_i_rate,
            "type_ii_rate": self.type_ii_rate,
            "accuracy": [{"query_length": n, **r.to_dict()} for n, r in self.accuracy],
            "trial_seeds": list(self.trial_seeds),
        }


def _homogeneity_trial(cfg: HomogeneityExperimentConfig, seed: int) -> bool:
    rng = np.random.default_rng(seed)
    k, n = cfg.sequences_per_group, cfg.sequence_length
    xs = [generate(cfg.source_x, n, rng) for _ in range(k)]
    ys = [generate(cfg.source_y, n, rng) for _ in range(k)]
    plan = SplitPlan(cfg.split, seed if cfg.split == "random" else None)
    report = homogeneity_test(SampleGroup("X", xs), SampleGroup("Y", ys), cfg.spec, cfg.alpha, plan)
    return report.decision is Decision.REJECT_H0


def _classification_trial(cfg: ClassificationExperimentConfig, trial: tuple[int, int]) -> list[bool]:
    index, seed = trial
    rng = np.random.default_rng(seed)
    truth = index % len(cfg.sources)
    refs = [(str(i), generate(src, cfg.reference_length, rng)) for i, src in enumerate(cfg.sources)]
    bank = TrainingBank(refs, cfg.spec)
    hits = []
    for n in cfg.query_lengths:
        u = generate(cfg.sources[truth], n, rng)
        hits.append(classify(u, bank).winner_index == truth)
    return hits


def error_rate_experiment(cfg) -> ErrorRateReport:
    """Run ``cfg.trials`` independent tests (or classifications) on fresh data."""
    if isinstance(cfg, HomogeneityExperimentConfig):
        seeds = trial_seeds(cfg.seed, cfg.trials)
        rejects = _run(lambda s: _homogeneity_trial(cfg, s), seeds, cfg.threads)
        return ErrorRateReport("homogeneity", cfg.trials, tuple(seeds),
                               rejection=Rate.of(sum(rejects), cfg.trials),
                               same_source=cfg.source_x == cfg.source_y)
    if isinstance(cfg, ClassificationExperimentConfig):
        seeds = trial_seeds(cfg.seed, cfg.trials)
        hits = np.array(_run(lambda t: _classification_trial(cfg, t), list(enumerate(seeds)), cfg.threads))
        acc = tuple((int(n), Rate.of(int(hits[:, j].sum()), cfg.trials)) for j, n in enumerate(cfg.query_lengths))
        return ErrorRateReport("classification", cfg.trials, tuple(seeds), accuracy=acc)
    raise DomainError(f"unsupported experiment config {type(cfg).__name__}")


# -- redundancy of a code on a Markov source ---------------------------------------

@dataclass(frozen=True)
class RedundancyReport:
    lengths: tuple
    bits_per_symbol: tuple
    redundancy: tuple
    limit_entropy: float
    trials: int
    seed: int

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def redundancy_experiment(model: MarkovModel, spec: CompressorSpec, lengths=(1000, 10_000, 100_000),
                          trials: int = 10, seed: int = 0, threads: int = 1) -> RedundancyReport:
    """Mean per-symbol code length minus the source's limit entropy, per sequence length."""
    h = limit_entropy(model)
    per_symbol = []
    for j, n in enumerate(lengths):
        seeds = trial_seeds(seed, trials, j)
        rates = _run(lambda s: compress_length(spec, generate(model, n, s)) / n, seeds, threads)
        per_symbol.append(float(np.mean(rates)))
    return RedundancyReport(tuple(lengths), tuple(per_symbol), tuple(r - h for r in per_symbol), h, trials, seed)
