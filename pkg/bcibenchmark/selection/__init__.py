from .separability import (
    RankedFeatures,
    bhattacharyya_1d,
    mahalanobis_1d,
    rank_independent,
    scatter_1d,
    separability_scores,
    shortlist,
)
from .search import (
    FeatureSubset,
    GAConfig,
    SearchMethod,
    exhaustive,
    genetic_select,
    sffs,
    subset_from_dict,
    subset_from_json,
    subset_to_dict,
    subset_to_json,
)
from .wrapper import Protocol, WrapperCriterion
from .stages import RankingCache, SelectionConfig, select_across_groups, select_within_group
