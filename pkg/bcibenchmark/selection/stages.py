"""The two selection stages: per-group search over a filtered shortlist, then a
search over the union of the group winners."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, replace

from ..classifiers import ClassifierSpec
from ..errors import DomainError, PreconditionError
from ..features import FeatureGroup
from .search import GAConfig, MAX_EXHAUSTIVE, FeatureSubset, SearchMethod, run_search
from .separability import RankedFeatures, rank_independent, shortlist
from .wrapper import Protocol

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SelectionConfig:
    method: SearchMethod = SearchMethod.SFFS
    protocol: Protocol = Protocol.INNER_CV
    shortlist: int = 200
    k_within: int = 20
    k_across: int = 25
    k_anfis: int = 5
    folds: int = 3
    demotion_exponent: float = 1.0
    max_exhaustive: int = MAX_EXHAUSTIVE
    ga: GAConfig = field(default_factory=GAConfig)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "method", SearchMethod(self.method))
        object.__setattr__(self, "protocol", Protocol(self.protocol))
        if min(self.shortlist, self.k_within, self.k_across, self.k_anfis) < 1:
            raise PreconditionError("shortlist and k values must be positive")

    def k_for(self, spec: ClassifierSpec, across=False):
        if spec.kind.is_anfis:
            return self.k_anfis
        return self.k_across if across else self.k_within

    def to_dict(self):
        data = asdict(self)
        data["method"] = self.method.value
        data["protocol"] = self.protocol.value
        return data


class RankingCache:
    """Filter-stage rankings depend only on the matrix, so classifiers share them."""

    def __init__(self, matrix, exponent=1.0):
        self.matrix = matrix
        self.exponent = exponent
        self._rankings = {}

    def get(self, group) -> RankedFeatures:
        group = FeatureGroup.parse(group)
        if group not in self._rankings:
            columns = self.matrix.group_columns(group)
            if columns.size == 0:
                raise DomainError(f"feature group {group.value} has no columns in this matrix")
            self._rankings[group] = rank_independent(self.matrix, columns, self.exponent)
        return self._rankings[group]


def _describe(subset: FeatureSubset, matrix, spec, cfg, group):
    return replace(
        subset,
        classifier=spec.kind.value,
        group=group,
        protocol=cfg.protocol.value,
        seed=cfg.seed,
        descriptors=tuple(matrix.descriptors[i].to_dict() for i in subset.indices),
    )


def select_within_group(matrix, group, spec: ClassifierSpec, criterion, cfg: SelectionConfig = SelectionConfig(),
                        rankings: RankingCache | None = None) -> FeatureSubset:
    group = FeatureGroup.parse(group)
    rankings = rankings or RankingCache(matrix, cfg.demotion_exponent)
    pool = shortlist(rankings.get(group), cfg.shortlist)
    k = min(cfg.k_for(spec), len(pool))
    subset = run_search(cfg.method, pool, k, criterion, cfg.ga, cfg.seed, cfg.max_exhaustive)
    logger.info("%s / %s: %d features, criterion %.4f", spec.kind.value, group.value, subset.size, subset.criterion)
    return _describe(subset, matrix, spec, cfg, group.value)


def select_across_groups(matrix, per_group_bests, spec: ClassifierSpec, criterion,
                         cfg: SelectionConfig = SelectionConfig()) -> FeatureSubset:
    per_group_bests = list(per_group_bests)
    if not per_group_bests:
        raise PreconditionError("need at least one per-group subset")
    pool = sorted({i for s in per_group_bests for i in s.indices})
    k = min(cfg.k_for(spec, across=True), len(pool))
    subset = run_search(cfg.method, pool, k, criterion, cfg.ga, cfg.seed, cfg.max_exhaustive)
    best_input = max(s.criterion for s in per_group_bests)
    regression = subset.criterion < best_input
    if regression:
        logger.warning("%s: search across groups ended at %.4f, below the best single group (%.4f)",
                       spec.kind.value, subset.criterion, best_input)
    subset = replace(subset, search_regression=regression)
    return _describe(subset, matrix, spec, cfg, None)
