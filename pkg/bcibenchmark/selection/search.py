"""Wrapper search strategies over a candidate pool.

A criterion is any callable mapping a sorted tuple of column indices to a
score in [0, 1]. Among equal scores the lexicographically smallest sorted
index tuple wins, so results do not depend on evaluation order.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations

import numpy as np

from ..errors import PreconditionError

logger = logging.getLogger(__name__)

MAX_EXHAUSTIVE = 200_000
SUBSET_VERSION = 1


class SearchMethod(str, Enum):
    SFFS = "sffs"
    GENETIC = "genetic"
    EXHAUSTIVE = "exhaustive"


@dataclass(frozen=True)
class GAConfig:
    pop: int = 50
    gens: int = 40
    p_cx: float = 0.9
    p_mut: float = 0.05
    elite: int = 2
    tournament: int = 3


@dataclass(frozen=True)
class FeatureSubset:
    indices: tuple
    criterion: float
    method: SearchMethod
    classifier: str = ""
    group: str | None = None
    history: tuple = ()
    search_regression: bool = False
    protocol: str = ""
    seed: int = 0
    descriptors: tuple = field(default=(), compare=False)

    @property
    def size(self):
        return len(self.indices)


def _key(subset):
    return tuple(sorted(int(i) for i in subset))


class _Memo:
    """Per-search cache in front of the criterion; counts distinct evaluations."""

    def __init__(self, criterion):
        self.criterion = criterion
        self.cache = {}

    def __call__(self, subset):
        key = _key(subset)
        if key not in self.cache:
            self.cache[key] = float(self.criterion(key))
        return self.cache[key]


def _better(a, b):
    """(score, subset) a beats b: higher score, then smaller sorted tuple."""
    if b is None:
        return True
    return a[0] > b[0] or (a[0] == b[0] and a[1] < b[1])


def _check_pool(pool, k):
    pool = tuple(sorted({int(i) for i in pool}))
    if not pool:
        raise PreconditionError("the candidate pool is empty")
    if not 1 <= k <= len(pool):
        raise PreconditionError(f"need 1 <= k <= pool size {len(pool)}, got k={k}")
    return pool


#------------------------------------------------------------------------------
# Sequential floating forward selection
#------------------------------------------------------------------------------
def sffs(pool, k, criterion, max_exclusions=None, overshoot=2, refine=True) -> FeatureSubset:
    """Add the best feature, then drop features while that beats the best set
    known at the smaller size; the current set is always swapped for the
    best one known at its size.

    Growth continues ``overshoot`` features past k so that size-k sets can
    also be reached by removal. With ``refine`` the best size-k set is then
    improved by single member-for-outsider swaps until no swap helps.
    Returns the best size-k set seen."""
    pool = _check_pool(pool, k)
    evaluate = _Memo(criterion)
    if k == len(pool):
        return FeatureSubset(pool, evaluate(pool), SearchMethod.SFFS, history=(evaluate(pool),))

    best = {}
    history = []
    exclusions_left = max_exclusions if max_exclusions is not None else 100 * k
    target = min(len(pool), k + max(0, overshoot))

    def record(subset):
        entry = (evaluate(subset), subset)
        if _better(entry, best.get(len(subset))):
            best[len(subset)] = entry
        history.append(entry[0])

    current = ()
    while len(current) < target:
        candidates = None
        for f in pool:
            if f in current:
                continue
            trial = _key(current + (f,))
            entry = (evaluate(trial), trial)
            if _better(entry, candidates):
                candidates = entry
        record(candidates[1])
        current = best[len(candidates[1])][1]

        while len(current) > 2 and exclusions_left > 0:
            reduced = None
            for f in current:
                trial = tuple(i for i in current if i != f)
                entry = (evaluate(trial), trial)
                if _better(entry, reduced):
                    reduced = entry
            if not _better(reduced, best.get(len(reduced[1]))):
                break
            exclusions_left -= 1
            record(reduced[1])
            current = reduced[1]

    if refine:
        _swap_refine(pool, best[k][1], evaluate, record)

    score, subset = best[k]
    logger.debug("SFFS k=%d: %.4f after %d evaluations", k, score, len(evaluate.cache))
    return FeatureSubset(subset, score, SearchMethod.SFFS, history=tuple(history))


def _swap_refine(pool, subset, evaluate, record):
    # best-improvement local search over one-for-one replacements
    current = (evaluate(subset), subset)
    while True:
        step = None
        for out in current[1]:
            kept = tuple(i for i in current[1] if i != out)
            for f in pool:
                if f in current[1]:
                    continue
                trial = _key(kept + (f,))
                entry = (evaluate(trial), trial)
                if _better(entry, step):
                    step = entry
        if step is None or not _better(step, current):
            return current
        record(step[1])
        current = step


#------------------------------------------------------------------------------
# Genetic search over k-subsets
#------------------------------------------------------------------------------
def genetic_select(pool, k, criterion, ga: GAConfig = GAConfig(), seed=0) -> FeatureSubset:
    pool = _check_pool(pool, k)
    if ga.pop < 4:
        raise PreconditionError(f"population must hold at least 4 individuals, got {ga.pop}")
    evaluate = _Memo(criterion)
    if k == len(pool):
        return FeatureSubset(pool, evaluate(pool), SearchMethod.GENETIC, history=(evaluate(pool),))

    rng = np.random.default_rng(seed)
    members = np.array(pool)

    def random_individual():
        return _key(rng.choice(members, size=k, replace=False))

    def tournament(population, scores):
        picks = rng.integers(0, len(population), size=ga.tournament)
        winner = None
        for i in picks:
            entry = (scores[i], population[i])
            if _better(entry, winner):
                winner = entry
        return winner[1]

    def crossover(a, b):
        common = sorted(set(a) & set(b))
        rest = sorted(set(a) ^ set(b))
        fill = rng.choice(rest, size=k - len(common), replace=False) if k > len(common) else []
        return _key(list(common) + list(fill))

    def mutate(child):
        genes = list(child)
        for pos in range(k):
            if rng.random() < ga.p_mut:
                outside = np.setdiff1d(members, genes)
                if outside.size:
                    genes[pos] = int(rng.choice(outside))
        return _key(genes)

    population = [random_individual() for _ in range(ga.pop)]
    scores = [evaluate(ind) for ind in population]
    best = None
    for entry in zip(scores, population):
        if _better(entry, best):
            best = entry
    history = [best[0]]

    for _ in range(ga.gens):
        ranked = sorted(range(ga.pop), key=lambda i: (-scores[i], population[i]))
        offspring = [population[i] for i in ranked[:ga.elite]]
        while len(offspring) < ga.pop:
            a = tournament(population, scores)
            b = tournament(population, scores)
            child = crossover(a, b) if rng.random() < ga.p_cx else a
            offspring.append(mutate(child))
        population = offspring
        scores = [evaluate(ind) for ind in population]
        for entry in zip(scores, population):
            if _better(entry, best):
                best = entry
        history.append(best[0])

    logger.debug("GA k=%d: %.4f after %d evaluations", k, best[0], len(evaluate.cache))
    return FeatureSubset(best[1], best[0], SearchMethod.GENETIC, history=tuple(history))


#------------------------------------------------------------------------------
# Exhaustive (small pools only)
#------------------------------------------------------------------------------
def exhaustive(pool, k, criterion, limit=MAX_EXHAUSTIVE) -> FeatureSubset:
    pool = _check_pool(pool, k)
    count = math.comb(len(pool), k)
    if count > limit:
        raise PreconditionError(f"C({len(pool)}, {k}) = {count} subsets exceeds the exhaustive limit of {limit}")
    best = None
    for subset in combinations(pool, k):
        entry = (float(criterion(subset)), subset)
        if _better(entry, best):
            best = entry
    return FeatureSubset(best[1], best[0], SearchMethod.EXHAUSTIVE, history=(best[0],))


def run_search(method, pool, k, criterion, ga: GAConfig = GAConfig(), seed=0, limit=MAX_EXHAUSTIVE):
    method = SearchMethod(method)
    if method is SearchMethod.SFFS:
        return sffs(pool, k, criterion)
    if method is SearchMethod.GENETIC:
        return genetic_select(pool, k, criterion, ga, seed)
    return exhaustive(pool, k, criterion, limit)


#------------------------------------------------------------------------------
# JSON
#------------------------------------------------------------------------------
def subset_to_dict(subset: FeatureSubset) -> dict:
    return {
        "version": SUBSET_VERSION,
        "indices": list(subset.indices),
        "criterion": subset.criterion,
        "method": subset.method.value,
        "classifier": subset.classifier,
        "group": subset.group,
        "history": list(subset.history),
        "search_regression": subset.search_regression,
        "protocol": subset.protocol,
        "seed": subset.seed,
        "descriptors": list(subset.descriptors),
    }


def subset_to_json(subset: FeatureSubset) -> str:
    return json.dumps(subset_to_dict(subset), sort_keys=True, indent=1)


def subset_from_dict(data) -> FeatureSubset:
    if data.get("version") != SUBSET_VERSION:
        raise PreconditionError(f"selection file version {data.get('version')} is not {SUBSET_VERSION}")
    return FeatureSubset(
        indices=tuple(data["indices"]),
        criterion=float(data["criterion"]),
        method=SearchMethod(data["method"]),
        classifier=data["classifier"],
        group=data["group"],
        history=tuple(data["history"]),
        search_regression=bool(data["search_regression"]),
        protocol=data["protocol"],
        seed=int(data["seed"]),
        descriptors=tuple(data["descriptors"]),
    )


def subset_from_json(text) -> FeatureSubset:
    return subset_from_dict(json.loads(text))
