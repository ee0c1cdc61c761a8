import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from compstat.codecs import Alphabet
from compstat.errors import DomainError, ResourceError
from compstat.sources import (
    InfiniteDivergenceWarning,
    MarkovModel,
    binary_entropy,
    entropy_m,
    generate,
    kl_divergence,
    kl_rate,
    limit_entropy,
    stationary_distribution,
)


def random_model(rng, A, order):
    P = rng.dirichlet(np.ones(A), size=A ** order)
    return MarkovModel(Alphabet(tuple(range(A))), order, P)


def test_model_validation():
    with pytest.raises(DomainError):
        MarkovModel(Alphabet.binary(), 1, [[0.5, 0.5], [0.7, 0.2]])
    with pytest.raises(DomainError):
        MarkovModel(Alphabet.binary(), 1, [[0.5, 0.5]])
    with pytest.raises(DomainError):
        MarkovModel(Alphabet.binary(), 0, [[1.2, -0.2]])
    with pytest.raises(ResourceError):
        MarkovModel(Alphabet.binary(), 21, np.full((1, 2), 0.5))


def test_generate_deterministic_and_constant():
    m = MarkovModel.iid([0.0, 1.0])
    assert set(generate(m, 100, 1).data.tolist()) == {1}
    chain = MarkovModel.binary_chain(0.3, 0.6)
    assert generate(chain, 500, 42) == generate(chain, 500, 42)
    assert generate(chain, 500, 42) != generate(chain, 500, 43)
    with pytest.raises(DomainError):
        generate(chain, 0, 1)


def test_bernoulli_frequency():
    s = generate(MarkovModel.bernoulli(0.2), 1_000_000, 7)
    assert abs(s.data.mean() - 0.2) <= 0.002


def test_chain_transition_frequencies():
    s = generate(MarkovModel.binary_chain(0.1, 0.3), 400_000, 3).data
    prev, nxt = s[:-1], s[1:]
    assert abs(nxt[prev == 0].mean() - 0.1) < 0.005
    assert abs(1 - nxt[prev == 1].mean() - 0.3) < 0.005


def test_higher_order_generation_matches_contexts():
    rng = np.random.default_rng(4)
    m = random_model(rng, 3, 2)
    s = generate(m, 300_000, 9).data
    ctx = s[:-2] * 3 + s[1:-1]
    for c in range(9):
        follow = s[2:][ctx == c]
        freq = np.bincount(follow, minlength=3) / follow.size
        np.testing.assert_allclose(freq, m.transition[c], atol=0.02)


def test_initial_distribution_respected():
    m = MarkovModel(Alphabet.binary(), 1, [[0.5, 0.5], [0.5, 0.5]], initial=[0.0, 1.0])
    firsts = [generate(m, 1, s).data[0] for s in range(200)]
    assert 0.35 < np.mean(firsts) < 0.65  # first symbol follows context "1", which is uniform


def test_stationary_matches_power_iteration():
    rng = np.random.default_rng(0)
    for A, order in ((2, 1), (3, 1), (2, 3), (3, 2)):
        m = random_model(rng, A, order)
        ref = oracles.stationary_by_power(oracles.context_matrix(m.transition, A, order))
        np.testing.assert_allclose(m.stationary, ref, atol=1e-10)


def test_stationary_reducible_chain_rejected():
    with pytest.raises(DomainError):
        stationary_distribution(np.array([[1.0, 0.0], [0.0, 1.0]]), 2, 1)


def test_stationary_transient_state_allowed():
    # state 0 leaks into absorbing state 1: unique law concentrated on 1
    pi = stationary_distribution(np.array([[0.5, 0.5], [0.0, 1.0]]), 2, 1)
    np.testing.assert_allclose(pi, [0.0, 1.0], atol=1e-12)


def test_entropy_examples():
    assert entropy_m(MarkovModel.bernoulli(0.5), 0) == 1.0
    assert entropy_m(MarkovModel.bernoulli(0.5), 3) == 1.0
    assert entropy_m(MarkovModel.bernoulli(0.2), 0) == pytest.approx(0.72193, abs=1e-5)
    assert limit_entropy(MarkovModel.binary_chain(0.1, 0.1)) == pytest.approx(0.46900, abs=1e-5)
    assert binary_entropy(0.1) == pytest.approx(oracles.entropy_bits([0.1, 0.9]), abs=1e-15)


def test_entropy_matches_block_enumeration():
    rng = np.random.default_rng(1)
    for A, order in ((2, 1), (3, 1), (2, 2)):
        m = random_model(rng, A, order)
        for k in range(order + 2):
            ref = oracles.entropy_m_bruteforce(m.transition, A, order, k)
            assert entropy_m(m, k) == pytest.approx(ref, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000), A=st.integers(2, 4), order=st.integers(0, 2))
def test_entropy_nonincreasing(seed, A, order):
    m = random_model(np.random.default_rng(seed), A, order)
    h = [entropy_m(m, k) for k in range(order + 3)]
    assert all(h[k] >= h[k + 1] - 1e-12 for k in range(len(h) - 1))
    assert h[order] == pytest.approx(h[-1], abs=1e-12)
    assert limit_entropy(m) == h[order]


def test_iid_limit_equals_h0():
    m = MarkovModel.iid([0.1, 0.2, 0.7])
    assert limit_entropy(m) == entropy_m(m, 0)


def test_entropy_guard():
    with pytest.raises(ResourceError):
        entropy_m(MarkovModel.bernoulli(0.3), 21)


def test_kl_examples():
    assert kl_divergence([0.3, 0.7], [0.3, 0.7]) == 0.0
    assert kl_divergence([0.5, 0.5], [0.75, 0.25]) == pytest.approx(0.207519, abs=1e-6)
    # D(0.2||0.8) = 0.2*log2(1/4) + 0.8*log2(4) = 1.2 exactly
    assert kl_divergence([0.8, 0.2], [0.2, 0.8]) == pytest.approx(1.2, abs=1e-12)


def test_kl_infinite_flagged():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        assert kl_divergence([0.5, 0.5], [1.0, 0.0]) == math.inf
    assert any(issubclass(w.category, InfiniteDivergenceWarning) for w in caught)
    with pytest.raises(DomainError):
        kl_divergence([1.0], [0.5, 0.5])


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(2, 6))
def test_kl_gibbs(seed, k):
    rng = np.random.default_rng(seed)
    p, q = rng.dirichlet(np.ones(k)), rng.dirichlet(np.ones(k))
    d = kl_divergence(p, q)
    assert d >= 0
    assert d == pytest.approx(oracles.kl_bits(p, q), abs=1e-12)


def test_kl_rate_reduces_to_kl_for_iid():
    x, y = MarkovModel.bernoulli(0.2), MarkovModel.bernoulli(0.8)
    assert kl_rate(x, y) == pytest.approx(1.2, abs=1e-12)
    c = MarkovModel.binary_chain(0.1, 0.3)
    pi = c.stationary
    expected = pi[0] * oracles.kl_bits([0.9, 0.1], [0.8, 0.2]) + pi[1] * oracles.kl_bits([0.3, 0.7], [0.8, 0.2])
    assert kl_rate(c, MarkovModel.bernoulli(0.2)) == pytest.approx(expected, abs=1e-12)


def test_model_dict_round_trip():
    m = MarkovModel.binary_chain(0.25, 0.5)
    d = m.to_dict()
    m2 = MarkovModel(Alphabet(tuple(d["alphabet"])), d["order"], d["transition"])
    assert m2 == m
