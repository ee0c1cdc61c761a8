import numpy as np
import pytest
from scipy import stats

from compstat.codecs import CompressorSpec
from compstat.errors import DomainError
from compstat.simulation import (
    ClassificationExperimentConfig,
    DeltaGrowthConfig,
    HomogeneityExperimentConfig,
    Rate,
    delta_growth_experiment,
    error_rate_experiment,
    fit_line,
    redundancy_experiment,
    trial_seeds,
    wilson_interval,
)
from compstat.sources import MarkovModel, limit_entropy

B2, B8 = MarkovModel.bernoulli(0.2), MarkovModel.bernoulli(0.8)


def test_trial_seeds_deterministic_and_distinct():
    a = trial_seeds(7, 100)
    assert a == trial_seeds(7, 100) and len(set(a)) == 100
    assert a[:10] == trial_seeds(7, 10)
    assert trial_seeds(7, 10, 1) != trial_seeds(7, 10, 2)


def test_wilson_matches_scipy():
    for k, n in ((0, 10), (3, 10), (50, 400), (399, 400), (400, 400)):
        ref = stats.binomtest(k, n).proportion_ci(confidence_level=0.99, method="wilson")
        lo, hi = wilson_interval(k, n, 0.99)
        assert lo == pytest.approx(ref.low, abs=1e-12) and hi == pytest.approx(ref.high, abs=1e-12)
    r = Rate.of(20, 400)
    assert r.rate == 0.05 and 0 <= r.low <= r.rate <= r.high <= 1


def test_fit_line_matches_polyfit_and_ols_variance():
    x = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
    y = 3.0 * x + 1.0 + np.array([0.1, -0.2, 0.05, 0.0, 0.1])
    slope, icpt, se_s, se_i = fit_line(x, y, np.full(5, 0.25))
    ref = np.polyfit(x, y, 1)
    assert slope == pytest.approx(ref[0]) and icpt == pytest.approx(ref[1])
    sxx = ((x - x.mean()) ** 2).sum()
    assert se_s == pytest.approx(np.sqrt(0.25 / sxx))
    assert se_i == pytest.approx(np.sqrt(0.25 * (1 / 5 + x.mean() ** 2 / sxx)))


def test_config_validation():
    with pytest.raises(DomainError):
        DeltaGrowthConfig(B2, B8, trials=0)
    with pytest.raises(DomainError):
        DeltaGrowthConfig(B2, B8, m_grid=(100,))
    with pytest.raises(DomainError):
        HomogeneityExperimentConfig(B2, B8, sequences_per_group=1)
    with pytest.raises(DomainError):
        ClassificationExperimentConfig((B2,))


def test_delta_growth_small_and_reproducible():
    cfg = DeltaGrowthConfig(B2, B8, m_grid=(100, 200, 400), context_length=5000, trials=20, seed=3)
    a = delta_growth_experiment(cfg)
    assert a == delta_growth_experiment(cfg)
    b = delta_growth_experiment(DeltaGrowthConfig(B2, B8, m_grid=(100, 200, 400), context_length=5000,
                                                  trials=20, seed=3, threads=4))
    assert a == b
    assert 0.8 < a.slope < 1.4 and a.slope_ci[0] < a.slope < a.slope_ci[1]
    assert set(a.to_dict()) >= {"slope", "intercept", "slope_ci", "mean_delta"}


def test_homogeneity_rates_small():
    cfg = HomogeneityExperimentConfig(B2, B8, sequences_per_group=10, sequence_length=500, trials=10,
                                      spec=CompressorSpec.ppm(1), seed=1)
    r = error_rate_experiment(cfg)
    assert r.rejection.rate == 1.0 and r.type_ii_rate == 0.0 and r.type_i_rate is None
    assert len(r.trial_seeds) == 10
    same = error_rate_experiment(HomogeneityExperimentConfig(B2, B2, sequences_per_group=10, sequence_length=500,
                                                             trials=10, spec=CompressorSpec.ppm(1), seed=1))
    assert same.same_source and same.type_i_rate == same.rejection.rate and same.type_ii_rate is None
    assert error_rate_experiment(cfg) == r


def test_classification_rates_small():
    chains = (MarkovModel.binary_chain(0.1, 0.1), MarkovModel.binary_chain(0.4, 0.4))
    cfg = ClassificationExperimentConfig(chains, reference_length=5000, query_lengths=(50, 400), trials=20,
                                         spec=CompressorSpec.ppm(2), seed=2, threads=3)
    r = error_rate_experiment(cfg)
    assert r.accuracy_at(400) >= 0.9
    d = r.to_dict()
    assert [a["query_length"] for a in d["accuracy"]] == [50, 400]


def test_redundancy_decreases():
    m = MarkovModel.binary_chain(0.1, 0.3)
    r = redundancy_experiment(m, CompressorSpec.ppm(3), lengths=(500, 5000, 50_000), trials=3, seed=0)
    assert r.limit_entropy == limit_entropy(m)
    assert r.redundancy[0] > r.redundancy[1] > r.redundancy[2] and abs(r.redundancy[2]) < 0.05
