import json
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from bcibenchmark.errors import PreconditionError
from bcibenchmark.selection import (
    FeatureSubset,
    GAConfig,
    SearchMethod,
    exhaustive,
    genetic_select,
    sffs,
    subset_from_json,
    subset_to_json,
)
from bcibenchmark.selection.search import run_search

WEIGHTS = {3: 0.9, 5: 0.7, 8: 0.4, 9: 0.35, 11: 0.1, 12: 0.05}


def additive(subset):
    return sum(WEIGHTS[i] for i in subset) / 3.0


def test_sffs_finds_the_top_features():
    result = sffs(WEIGHTS, 3, additive)
    assert result.indices == (3, 5, 8)
    assert result.criterion == pytest.approx(2.0 / 3.0)
    assert result.method is SearchMethod.SFFS
    assert result.history


def test_exhaustive_matches_on_additive_criterion():
    assert exhaustive(WEIGHTS, 3, additive).indices == (3, 5, 8)


def test_genetic_reaches_the_optimum_on_a_small_pool():
    ga = GAConfig(pop=20, gens=30)
    result = genetic_select(WEIGHTS, 2, additive, ga, seed=4)
    assert result.indices == (3, 5)
    assert list(result.history) == sorted(result.history)


def test_equal_scores_pick_the_smallest_tuple():
    flat = lambda subset: 0.5
    assert exhaustive([7, 2, 4, 9], 2, flat).indices == (2, 4)
    assert sffs([7, 2, 4, 9], 2, flat).indices == (2, 4)


def test_floating_removal_improves_the_smaller_set():
    # the best pair avoids the best single feature
    scores = {(0,): 0.6, (1,): 0.5, (2,): 0.5, (3,): 0.1,
              (0, 1): 0.6, (0, 2): 0.6, (0, 3): 0.6, (1, 2): 0.95, (1, 3): 0.5, (2, 3): 0.5,
              (0, 1, 2): 0.97, (0, 1, 3): 0.6, (0, 2, 3): 0.6, (1, 2, 3): 0.9, (0, 1, 2, 3): 0.8}
    criterion = lambda subset: scores[tuple(subset)]
    result = sffs(range(4), 3, criterion)
    assert result.indices == (0, 1, 2)
    assert 0.95 in result.history
    assert exhaustive(range(4), 2, criterion).indices == (1, 2)


def gaussian_pool(seed, n=10):
    """Accuracy of the best linear rule on a random correlated Gaussian pair,
    as a function of the feature subset. Correlations make it non-additive."""
    rng = np.random.default_rng(seed)
    W = rng.normal(size=(n, 4))
    cov = W @ W.T + np.diag(rng.uniform(0.5, 1.5, n))
    gap = rng.normal(size=n)

    def criterion(subset):
        idx = list(subset)
        d = gap[idx]
        distance = d @ np.linalg.solve(cov[np.ix_(idx, idx)], d)
        return float(norm.cdf(np.sqrt(distance) / 2.0))

    return criterion


@pytest.mark.parametrize("seed", range(20))
def test_sffs_is_near_optimal_on_correlated_pools(seed):
    criterion = gaussian_pool(seed)
    optimum = exhaustive(range(10), 3, criterion).criterion
    assert sffs(range(10), 3, criterion).criterion >= 0.99 * optimum


def test_genetic_is_near_optimal_on_correlated_pools():
    hits = 0
    for seed in range(100):
        criterion = gaussian_pool(1000 + seed)
        optimum = exhaustive(range(10), 3, criterion).criterion
        if genetic_select(range(10), 3, criterion, seed=seed).criterion >= 0.95 * optimum:
            hits += 1
    assert hits >= 95


def test_swap_pass_recovers_a_pair_greedy_growth_misses():
    # 0 is the best single feature but the best pair is (1, 2)
    scores = {(0,): 0.7, (1,): 0.6, (2,): 0.6, (3,): 0.5,
              (0, 1): 0.72, (0, 2): 0.72, (0, 3): 0.71, (1, 2): 0.9, (1, 3): 0.6, (2, 3): 0.6}
    criterion = lambda subset: scores[tuple(subset)]
    grown = sffs(range(4), 2, criterion, overshoot=0, refine=False)
    assert grown.indices == (0, 1)
    assert sffs(range(4), 2, criterion, overshoot=0).indices == (1, 2)


def test_each_subset_is_scored_once():
    calls = Counter()

    def counting(subset):
        calls[subset] += 1
        return additive(subset)

    sffs(WEIGHTS, 4, counting)
    assert max(calls.values()) == 1


@settings(deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_genetic_is_seed_deterministic(seed):
    ga = GAConfig(pop=8, gens=5)
    a = genetic_select(WEIGHTS, 3, additive, ga, seed)
    b = genetic_select(WEIGHTS, 3, additive, ga, seed)
    assert a == b
    assert len(set(a.indices)) == 3
    assert set(a.indices) <= set(WEIGHTS)


def test_whole_pool_is_returned_directly():
    result = run_search("genetic", [4, 1], 2, lambda s: 0.25)
    assert result.indices == (1, 4)
    assert result.criterion == 0.25


def test_pool_checks():
    with pytest.raises(PreconditionError):
        sffs([], 1, additive)
    with pytest.raises(PreconditionError):
        sffs([3, 5], 3, additive)
    with pytest.raises(PreconditionError):
        exhaustive(range(40), 10, additive, limit=1000)
    with pytest.raises(PreconditionError):
        genetic_select(WEIGHTS, 2, additive, GAConfig(pop=2))


def test_subset_json():
    subset = FeatureSubset(indices=(3, 5), criterion=0.8, method=SearchMethod.SFFS, classifier="SVM",
                           group="Energy", history=(0.5, 0.8), protocol="inner-cv", seed=2)
    text = subset_to_json(subset)
    assert subset_from_json(text) == subset
    data = json.loads(text)
    data["version"] = 99
    with pytest.raises(PreconditionError):
        subset_from_json(json.dumps(data))
