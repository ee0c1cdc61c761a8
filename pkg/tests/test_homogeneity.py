import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

import oracles
from compstat.codecs import Alphabet, CompressorSpec, Sequence, concat
from compstat.errors import DomainError
from compstat.homogeneity import (
    ContingencyTable,
    Decision,
    Method,
    SampleGroup,
    SplitPlan,
    TestReport,
    build_2x2,
    build_sxs,
    check_requirements,
    chi_square_2x2,
    chi_square_sxs,
    delta_scores,
    fisher_exact_2x2,
    gamma_scores,
    homogeneity_test,
    homogeneity_test_multi,
    psi_test,
    split,
)
from compstat.sources import MarkovModel, generate

BIN = Alphabet.binary()


def group(label, model, k, n, seed):
    rng = np.random.default_rng(seed)
    return SampleGroup(label, [generate(model, n, rng) for _ in range(k)])


# -- split ------------------------------------------------------------------------

def test_split_first_half():
    seqs = [Sequence(BIN, [i % 2] * (i + 1)) for i in range(4)]
    ref, held = split(SampleGroup("g", seqs))
    assert ref == concat(seqs[:2]) and held == seqs[2:]
    ref, held = split(SampleGroup("g", seqs[:3]))
    assert ref == seqs[0] and held == seqs[1:3]


def test_split_random_is_seeded_partition():
    plan = SplitPlan("random", 5)
    for k in range(2, 12):
        ref, held = plan.indices(k)
        assert sorted(ref + held) == list(range(k)) and len(ref) == k // 2
        assert ref == sorted(ref) and held == sorted(held)
        assert plan.indices(k) == (ref, held)


def test_split_errors():
    with pytest.raises(DomainError):
        split(SampleGroup("g", [Sequence(BIN, [0, 1])]))
    with pytest.raises(DomainError):
        SplitPlan("random")
    with pytest.raises(DomainError):
        SplitPlan("halves")


# -- scores -----------------------------------------------------------------------

def test_identical_references_give_zero_scores():
    spec = CompressorSpec.ppm(2)
    ref = Sequence(BIN, [0, 1, 1, 0, 1, 0, 0, 1])
    held = [Sequence(BIN, [1, 1, 0]), Sequence(BIN, [0])]
    assert gamma_scores(held, ref, ref, spec) == [0.0, 0.0]
    assert delta_scores(held, ref, ref, spec) == [0.0, 0.0]
    assert len(gamma_scores(held[:1], ref, ref, spec)) == 1


def test_gamma_delta_mirror():
    spec = CompressorSpec.ppm(1)
    rng = np.random.default_rng(0)
    a, b = generate(MarkovModel.bernoulli(0.3), 500, rng), generate(MarkovModel.bernoulli(0.6), 500, rng)
    held = [generate(MarkovModel.bernoulli(0.4), 100, rng) for _ in range(3)]
    assert gamma_scores(held, a, b, spec) == delta_scores(held, b, a, spec)


def test_gamma_and_delta_signs_under_alternative():
    spec = CompressorSpec.ppm(0)
    bx, by = MarkovModel.bernoulli(0.2), MarkovModel.bernoulli(0.8)
    rng = np.random.default_rng(12)
    pos_g = pos_d = 0
    for _ in range(200):
        x_star, y_star = generate(bx, 10_000, rng), generate(by, 10_000, rng)
        pos_g += gamma_scores([generate(bx, 2000, rng)], x_star, y_star, spec)[0] > 0
        pos_d += delta_scores([generate(by, 2000, rng)], x_star, y_star, spec)[0] > 0
    assert pos_g >= 190 and pos_d >= 190


def test_scores_parallel_equals_serial():
    spec = CompressorSpec.ppm(3)
    g = group("x", MarkovModel.binary_chain(0.2, 0.3), 10, 400, 1)
    h = group("y", MarkovModel.binary_chain(0.3, 0.3), 10, 400, 2)
    a = homogeneity_test(g, h, spec, threads=1)
    b = homogeneity_test(g, h, spec, threads=4)
    assert a == b


# -- tables -----------------------------------------------------------------------

def test_build_2x2_examples():
    assert build_2x2([0.5, -0.2, 1.3], [2.0, -0.1]).cells() == (2, 1, 1, 1)
    assert build_2x2([0.0], [0.0]).cells() == (1, 0, 0, 1)
    assert build_2x2([1, 2], [3, 4, 5]).cells() == (2, 0, 0, 3)
    with pytest.raises(DomainError):
        build_2x2([], [1.0])


@settings(max_examples=200, deadline=None)
@given(g=st.lists(st.floats(-5, 5), min_size=1, max_size=30), d=st.lists(st.floats(-5, 5), min_size=1, max_size=30))
def test_build_2x2_row_sums(g, d):
    t = build_2x2(g, d).array
    assert t[0].sum() == len(g) and t[1].sum() == len(d)


def test_contingency_validation_and_round_trip():
    with pytest.raises(DomainError):
        ContingencyTable.of(1, -1, 0, 0)
    t = ContingencyTable.of(1, 2, 3, 4, row_labels=("x", "y"), col_labels=("X", "Y"))
    assert ContingencyTable.from_dict(t.to_dict()) == t
    assert t.transpose().cells() == (1, 3, 2, 4)


def test_check_requirements_examples():
    assert check_requirements(ContingencyTable.of(40, 10, 10, 40)) == []
    assert any("expected" in w for w in check_requirements(ContingencyTable.of(3, 1, 1, 2)))
    assert any("margin" in w for w in check_requirements(ContingencyTable.of(5, 0, 5, 0)))


# -- tests ------------------------------------------------------------------------

def test_chi_square_examples():
    r = chi_square_2x2(ContingencyTable.of(30, 10, 10, 30), yates=False)
    assert r.statistic == pytest.approx(20.0, abs=1e-9)
    assert r.p_value == pytest.approx(7.7e-6, rel=0.01)
    assert r.decision is Decision.REJECT_H0 and r.method is Method.CHI_SQUARE
    r = chi_square_2x2(ContingencyTable.of(25, 25, 25, 25))
    assert r.statistic == 0.0 and r.decision is Decision.RETAIN_H0
    r = chi_square_2x2(ContingencyTable.of(10, 0, 0, 10), yates=False)
    assert r.statistic == pytest.approx(20.0) and r.decision is Decision.REJECT_H0


def test_chi_square_matches_scipy():
    rng = np.random.default_rng(3)
    for _ in range(300):
        cells = rng.integers(1, 60, 4)
        t = ContingencyTable.of(*cells.tolist())
        for yates in (True, False):
            ref = stats.chi2_contingency(cells.reshape(2, 2), correction=yates)
            r = chi_square_2x2(t, yates=yates)
            assert r.statistic == pytest.approx(ref.statistic, rel=1e-9, abs=1e-12)
            assert r.p_value == pytest.approx(ref.pvalue, rel=1e-9, abs=1e-15)


def test_chi_square_degenerate_margin_retains():
    r = chi_square_2x2(ContingencyTable.of(5, 0, 5, 0))
    assert r.decision is Decision.RETAIN_H0 and r.statistic is None and r.p_value == 1.0
    assert any("zero margin" in w for w in r.requirement_warnings)


def test_fisher_examples():
    assert fisher_exact_2x2(ContingencyTable.of(10, 0, 0, 10)) == pytest.approx(2 / math.comb(20, 10), rel=1e-12)
    assert fisher_exact_2x2(ContingencyTable.of(5, 5, 5, 5)) == 1.0
    assert fisher_exact_2x2(ContingencyTable.of(0, 0, 0, 0)) == 1.0


def test_fisher_exhaustive_small():
    for cells in oracles.all_tables(15):
        assert fisher_exact_2x2(ContingencyTable.of(*cells)) == pytest.approx(oracles.fisher_bruteforce(*cells), abs=1e-12)


def test_fisher_matches_scipy_where_defined():
    for cells in oracles.all_tables(12):
        if 0 in (sum(cells[:2]), sum(cells[2:]), cells[0] + cells[2], cells[1] + cells[3]):
            continue
        ref = stats.fisher_exact(np.array(cells).reshape(2, 2)).pvalue
        assert fisher_exact_2x2(ContingencyTable.of(*cells)) == pytest.approx(ref, rel=1e-7)


def test_psi_picks_method():
    assert psi_test(ContingencyTable.of(40, 10, 10, 40)).method is Method.CHI_SQUARE_YATES
    r = psi_test(ContingencyTable.of(3, 1, 1, 2))
    assert r.method is Method.FISHER_EXACT and r.requirement_warnings


def test_decision_invariant_and_alpha_validation():
    t = ContingencyTable.of(8, 2, 2, 8)
    for alpha in (0.001, 0.01, 0.05, 0.2, 0.5):
        r = psi_test(t, alpha)
        assert (r.decision is Decision.REJECT_H0) == (r.p_value < alpha)
    with pytest.raises(DomainError):
        chi_square_2x2(t, alpha=1.0)
    with pytest.raises(DomainError):
        psi_test(t, alpha=0.0)


def test_report_round_trip():
    r = psi_test(ContingencyTable.of(12, 3, 4, 9)).with_scores([0.1, -2.0], [3.5], ["note"])
    assert TestReport.from_dict(r.to_dict()) == r


def test_chi_square_symmetric_under_transpose():
    rng = np.random.default_rng(8)
    for _ in range(100):
        t = ContingencyTable.of(*rng.integers(1, 40, 4).tolist())
        assert chi_square_2x2(t).statistic == pytest.approx(chi_square_2x2(t.transpose()).statistic, rel=1e-12)


# -- s x s ------------------------------------------------------------------------

def test_sxs_examples():
    r = chi_square_sxs(ContingencyTable(np.full((3, 3), 10)))
    assert r.statistic == 0.0 and r.decision is Decision.RETAIN_H0
    r = chi_square_sxs(ContingencyTable(np.diag([30, 30, 30])))
    assert r.statistic == pytest.approx(180.0) and r.decision is Decision.REJECT_H0
    t = ContingencyTable.of(30, 10, 12, 28)
    assert chi_square_sxs(t).statistic == pytest.approx(chi_square_2x2(t, yates=False).statistic, rel=1e-12)


def test_sxs_degenerate():
    r = chi_square_sxs(ContingencyTable(np.array([[3, 0, 2], [1, 0, 4], [2, 0, 2]])))
    assert r.decision is Decision.RETAIN_H0 and r.p_value == 1.0


def test_build_sxs_separated_sources_diagonal():
    groups = [group(str(p), MarkovModel.bernoulli(p), 10, 1000, i) for i, p in enumerate((0.1, 0.5, 0.9))]
    t = build_sxs(groups, CompressorSpec.ppm(0))
    assert t.array.sum(axis=1).tolist() == [5, 5, 5]
    assert np.trace(t.array) == 15


def test_build_sxs_identical_sources_spread():
    m = MarkovModel.bernoulli(0.4)
    groups = [group(str(i), m, 40, 300, 100 + i) for i in range(3)]
    t = build_sxs(groups, CompressorSpec.ppm(0)).array
    assert (t.sum(axis=1) == 20).all()
    # under H0 the rows share one distribution even if the columns are not uniform
    r = homogeneity_test_multi(groups, CompressorSpec.ppm(0))
    assert r.method is Method.CHI_SQUARE_SXS and r.decision is Decision.RETAIN_H0


def test_build_sxs_ties_go_to_lowest_column():
    seqs = [Sequence(BIN, [0, 1, 0, 1]) for _ in range(4)]
    groups = [SampleGroup("a", seqs), SampleGroup("b", seqs)]
    assert build_sxs(groups, CompressorSpec.ppm(1)).array.tolist() == [[2, 0], [2, 0]]


# -- end to end -------------------------------------------------------------------

def test_same_group_retains():
    g = group("x", MarkovModel.binary_chain(0.2, 0.4), 20, 2000, 4)
    r = homogeneity_test(g, g, CompressorSpec.ppm(3))
    assert r.decision is Decision.RETAIN_H0
    assert set(r.gammas) == set(r.deltas) == {0.0}
    assert any("identical reference" in w for w in r.requirement_warnings)


def test_same_source_retains():
    m = MarkovModel.binary_chain(0.2, 0.4)
    r = homogeneity_test(group("x", m, 20, 2000, 4), group("y", m, 20, 2000, 5), CompressorSpec.ppm(3))
    assert r.decision is Decision.RETAIN_H0


def test_different_sources_reject():
    gx = group("x", MarkovModel.bernoulli(0.2), 20, 2000, 5)
    gy = group("y", MarkovModel.bernoulli(0.8), 20, 2000, 6)
    r = homogeneity_test(gx, gy, CompressorSpec.ppm(3))
    assert r.decision is Decision.REJECT_H0 and r.table.cells() == (10, 0, 0, 10)


def test_swapping_groups_transposes_table():
    gx = group("x", MarkovModel.bernoulli(0.3), 12, 800, 7)
    gy = group("y", MarkovModel.bernoulli(0.45), 12, 800, 8)
    a = homogeneity_test(gx, gy, CompressorSpec.ppm(1))
    b = homogeneity_test(gy, gx, CompressorSpec.ppm(1))
    n11, n12, n21, n22 = a.table.cells()
    assert b.table.cells() == (n22, n21, n12, n11)
    assert a.p_value == pytest.approx(b.p_value, rel=1e-12)


def test_gamma_delta_same_law_under_null():
    m = MarkovModel.binary_chain(0.2, 0.4)
    gammas, deltas = [], []
    for seed in range(30):
        r = homogeneity_test(group("x", m, 10, 600, 2 * seed), group("y", m, 10, 600, 2 * seed + 1),
                             CompressorSpec.ppm(2))
        gammas += r.gammas
        deltas += r.deltas
    assert stats.ks_2samp(gammas, deltas).pvalue > 0.001


def test_length_ratio_warning():
    rng = np.random.default_rng(0)
    m = MarkovModel.bernoulli(0.5)
    g = SampleGroup("x", [generate(m, 10, rng), generate(m, 2000, rng), generate(m, 50, rng)])
    h = SampleGroup("y", [generate(m, 100, rng) for _ in range(3)])
    r = homogeneity_test(g, h, CompressorSpec.ppm(1))
    assert any("ratio" in w and "'x'" in w for w in r.requirement_warnings)


def test_sample_group_validation():
    with pytest.raises(DomainError):
        SampleGroup("x", [])
    with pytest.raises(DomainError):
        SampleGroup("x", [Sequence(BIN, [])])
