import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from aperiodic.algebra import TAU_FLOAT, ValidationError
from aperiodic.randomtiling import (
    GOLDEN_FREQUENCY,
    BinaryEnsemble,
    BudgetExceededError,
    DartRhombusConfig,
    all_rhombus_config,
    bernoulli_entropy,
    block_entropy,
    count_distribution,
    entropy_scan,
    enumerate_configs,
    is_valid,
    iter_configs,
    ladder_entropies,
    mc_sample,
    mc_visits,
    move_graph_connected,
    sample_binary_chain,
)


def test_bernoulli_values():
    assert bernoulli_entropy(0.5) == pytest.approx(math.log(2))
    assert bernoulli_entropy(0.0) == 0.0 == bernoulli_entropy(1.0)
    # golden frequency, via scipy
    assert bernoulli_entropy(GOLDEN_FREQUENCY) == pytest.approx(stats.entropy([1 / TAU_FLOAT, 1 - 1 / TAU_FLOAT]), abs=1e-12)
    assert bernoulli_entropy(GOLDEN_FREQUENCY) == pytest.approx(0.6650, abs=1e-4)
    with pytest.raises(ValidationError):
        bernoulli_entropy(1.5)


@given(st.floats(0.0, 1.0))
def test_bernoulli_symmetric(p):
    assert bernoulli_entropy(p) == pytest.approx(bernoulli_entropy(1 - p), abs=1e-12)
    assert bernoulli_entropy(p) <= math.log(2) + 1e-15


def test_binary_sampler_reproducible():
    e = BinaryEnsemble(0.3, 5000, seed=7)
    w = sample_binary_chain(e)
    assert w == sample_binary_chain(e) and len(w) == 5000
    assert w.count("a") / 5000 == pytest.approx(0.3, abs=0.03)
    with pytest.raises(ValidationError):
        BinaryEnsemble(0.3, -1)


def test_block_entropy_of_random_word():
    w = sample_binary_chain(BinaryEnsemble(0.4, 200_000, seed=1))
    for b in (1, 2, 4):
        assert block_entropy(w, b) == pytest.approx(bernoulli_entropy(0.4), abs=0.01)
    assert block_entropy("ab" * 500, 6) == pytest.approx(math.log(2) / 6, rel=1e-3)
    with pytest.raises(ValidationError):
        block_entropy("ab", 3)


def test_counts_match_explicit_listing():
    for L1, L2 in [(1, 1), (1, 2), (2, 2), (1, 3), (2, 3)]:
        listed = list(iter_configs(L1, L2))
        assert len(set(listed)) == len(listed) == enumerate_configs(L1, L2)
        assert all(is_valid(c) for c in listed)


def test_count_ladder():
    # counts follow 2^(cells + 1) on every torus tried
    for (L1, L2), n in [((1, 1), 4), ((2, 2), 32), ((3, 3), 1024), ((3, 4), 8192)]:
        assert enumerate_configs(L1, L2) == n


def test_density_split_sums_to_total():
    dist = count_distribution(3, 3)
    assert sum(dist.values()) == 1024
    zero_darts = sum(v for k, v in dist.items() if k[3] == 0)
    assert enumerate_configs(3, 3, {"dart": 0}) == zero_darts
    for key in dist:
        # every tile glues two pieces
        assert 2 * sum(key) == 6 * 9
    with pytest.raises(ValidationError):
        enumerate_configs(2, 2, {"hexagon": 1})


def test_budget():
    with pytest.raises(BudgetExceededError, match="budget"):
        enumerate_configs(5, 5)
    assert enumerate_configs(0, 3) == 0


def test_invalid_configs_rejected():
    good = all_rhombus_config(2, 2)
    assert is_valid(good) and good.counts() == (4, 4, 4, 0)
    p = list(good.partner)
    p[0], p[1] = p[1], p[0]
    assert not is_valid(DartRhombusConfig(2, 2, tuple(p)))
    assert not is_valid(DartRhombusConfig(2, 2, good.partner[:-1]))


def test_move_graph_connected():
    for L1, L2 in [(1, 1), (1, 2), (2, 2), (2, 3)]:
        assert move_graph_connected(L1, L2)


def test_mc_preserves_validity_and_is_seeded():
    start = all_rhombus_config(3, 3)
    a = mc_sample(start, 2000, seed=3)
    assert is_valid(a) and a == mc_sample(start, 2000, seed=3)
    assert 2 * sum(a.counts()) == 54


def test_thinned_chain_sees_both_parity_classes():
    # an even thinning interval would see only half the states of a period-two chain
    assert len(mc_visits(all_rhombus_config(2, 2), 20_000, seed=2, thin=2)) == 32


def test_mc_uniform_on_small_torus():
    visits = mc_visits(all_rhombus_config(2, 2), 160_000, seed=11, thin=10)
    assert len(visits) == 32
    obs = np.array(list(visits.values()))
    mean = obs.sum() / 32
    sigma = math.sqrt(mean * (1 - 1 / 32))
    assert np.all(np.abs(obs - mean) < 4 * sigma)
    assert stats.chisquare(obs).pvalue > 1e-3


def test_ladder_entropies_decrease():
    rows = ladder_entropies([(2, 2), (3, 3), (4, 4)])
    per_tile = [r["per_tile"] for r in rows]
    assert per_tile[0] == pytest.approx(math.log(32) / 12)
    assert per_tile == sorted(per_tile, reverse=True)


def test_binary_scan():
    s = entropy_scan("binary")
    assert s.argmax == pytest.approx(0.5)
    assert s.r2 > 0.99


def test_dart_rhombus_scan():
    s = entropy_scan("dart-rhombus", torus=(4, 4))
    assert s.argmax == s.metadata["symmetric_point"] == 8
    assert s.r2 > 0.95
    with pytest.raises(ValidationError):
        entropy_scan("hexagon")
