from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, replace
from typing import NamedTuple

import numpy as np
from joblib import Parallel, delayed

from ..errors import StructuralError
from .autoregressive import ARConfig, extract_ar
from .descriptors import FeatureGroup, concat_blocks
from .energy import EnergyConfig, extract_energy
from .entropy import EntropyConfig, extract_entropy
from .statistic import StatisticsConfig, extract_statistics
from .transform import TransformConfig, WaveletConfig, dct_dst, extract_wavelets

logger = logging.getLogger(__name__)

# columns with std at or below this (relative to max(1, |mean|)) count as constant
CONSTANT_TOLERANCE = 1e-10


@dataclass(frozen=True)
class FeatureConfig:
    groups: tuple = tuple(FeatureGroup)
    statistics: StatisticsConfig = field(default_factory=StatisticsConfig)
    entropy: EntropyConfig = field(default_factory=EntropyConfig)
    ar: ARConfig = field(default_factory=ARConfig)
    energy: EnergyConfig = field(default_factory=EnergyConfig)
    transform: TransformConfig = field(default_factory=TransformConfig)
    wavelet: WaveletConfig = field(default_factory=WaveletConfig)

    def __post_init__(self):
        groups = sorted({FeatureGroup.parse(g) for g in self.groups}, key=lambda g: g.rank)
        object.__setattr__(self, "groups", tuple(groups))

    def to_dict(self):
        data = asdict(self)
        data["groups"] = [g.value for g in self.groups]
        return data


class NormalizationStats(NamedTuple):
    mean: np.ndarray
    std: np.ndarray


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    values: np.ndarray
    descriptors: tuple
    labels: np.ndarray
    normalization: str = "raw"
    mean: np.ndarray | None = None
    std: np.ndarray | None = None
    degenerate_counts: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if values.ndim != 2:
            raise StructuralError(f"feature values must be 2-D, got shape {values.shape}")
        if len(self.descriptors) != values.shape[1]:
            raise StructuralError(f"{len(self.descriptors)} descriptors for {values.shape[1]} columns")
        if labels.shape[0] != values.shape[0]:
            raise StructuralError(f"{labels.shape[0]} labels for {values.shape[0]} rows")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "descriptors", tuple(self.descriptors))

    @property
    def n_trials(self):
        return self.values.shape[0]

    @property
    def n_features(self):
        return self.values.shape[1]

    @property
    def stats(self):
        if self.mean is None:
            return None
        return NormalizationStats(self.mean, self.std)

    def group_columns(self, group):
        group = FeatureGroup.parse(group)
        return np.array([i for i, d in enumerate(self.descriptors) if d.group is group], dtype=np.int64)

    def groups(self):
        return sorted({d.group for d in self.descriptors}, key=lambda g: g.rank)

    def take_rows(self, rows):
        rows = np.asarray(rows, dtype=np.int64)
        return replace(self, values=self.values[rows], labels=self.labels[rows])

    def take_columns(self, columns):
        columns = np.asarray(columns, dtype=np.int64)
        return replace(
            self,
            values=self.values[:, columns],
            descriptors=tuple(self.descriptors[c] for c in columns),
            mean=None if self.mean is None else self.mean[columns],
            std=None if self.std is None else self.std[columns],
        )


#------------------------------------------------------------------------------
# Extraction
#------------------------------------------------------------------------------
def extract_trial(trial, cfg: FeatureConfig, groups=None):
    """All enabled groups for one trial, unsorted, plus per-group degenerate counts."""
    groups = cfg.groups if groups is None else tuple(FeatureGroup.parse(g) for g in groups)
    blocks = {}
    for group in groups:
        if group is FeatureGroup.STATISTIC:
            blocks[group] = extract_statistics(trial, cfg.statistics)
        elif group is FeatureGroup.ENTROPY:
            blocks[group] = extract_entropy(trial, cfg.entropy)
        elif group is FeatureGroup.AR:
            blocks[group] = extract_ar(trial, cfg.ar)
        elif group is FeatureGroup.ENERGY:
            blocks[group] = extract_energy(trial, cfg.energy)
        elif group is FeatureGroup.DCTDST:
            blocks[group] = dct_dst(trial, cfg.transform.k)
        elif group is FeatureGroup.WAVELET:
            blocks[group] = extract_wavelets(trial, cfg.wavelet)
    block = concat_blocks(list(blocks.values()))
    return block, {g.value: b.degenerate for g, b in blocks.items()}


def build_feature_matrix(trials, groups=None, cfg: FeatureConfig = FeatureConfig(), jobs=1) -> FeatureMatrix:
    """One row per trial, columns sorted by descriptor; independent of ``jobs``."""
    trials = list(trials)
    if not trials:
        raise StructuralError("cannot build a feature matrix from zero trials")
    shape = trials[0].samples.shape
    for i, trial in enumerate(trials):
        if trial.samples.shape != shape:
            raise StructuralError(f"trial {i} has shape {trial.samples.shape}, expected {shape}")
        if trial.fs != trials[0].fs:
            raise StructuralError(f"trial {i} sampled at {trial.fs} Hz, expected {trials[0].fs} Hz")

    rows = Parallel(n_jobs=jobs)(delayed(extract_trial)(t, cfg, groups) for t in trials)
    descriptors = rows[0][0].descriptors
    order = sorted(range(len(descriptors)), key=lambda i: descriptors[i].sort_key)
    sorted_descriptors = [descriptors[i] for i in order]
    for a, b in zip(sorted_descriptors, sorted_descriptors[1:]):
        if a == b:
            raise StructuralError(f"duplicate feature column {a.label}")

    values = np.vstack([block.values for block, _ in rows])[:, order]
    bad = ~np.isfinite(values)
    if bad.any():
        logger.warning("Replacing %d non-finite feature values with 0", int(bad.sum()))
        values = np.where(bad, 0.0, values)

    degenerate = {}
    for _, counts in rows:
        for group, count in counts.items():
            degenerate[group] = degenerate.get(group, 0) + count
    if any(degenerate.values()):
        logger.info("Degenerate feature values per group: %s", degenerate)

    logger.info("Extracted %d features from %d trials", values.shape[1], values.shape[0])
    return FeatureMatrix(
        values=values,
        descriptors=tuple(sorted_descriptors),
        labels=np.array([t.label for t in trials]),
        degenerate_counts=degenerate,
    )


#------------------------------------------------------------------------------
# Normalization
#------------------------------------------------------------------------------
def normalization_stats(values) -> NormalizationStats:
    values = np.asarray(values, dtype=float)
    mean = values.mean(axis=0)
    std = values.std(axis=0)
    constant = std <= CONSTANT_TOLERANCE * np.maximum(1.0, np.abs(mean))
    return NormalizationStats(mean, np.where(constant, 0.0, std))


def _zscore(values, stats: NormalizationStats):
    scale = np.where(stats.std > 0, stats.std, 1.0)
    out = (values - stats.mean) / scale
    out[:, stats.std == 0] = 0.0
    return out


def normalize(matrix: FeatureMatrix) -> FeatureMatrix:
    """Per-column z-score with statistics of ``matrix`` itself (the training rows)."""
    stats = normalization_stats(matrix.values)
    return replace(matrix, values=_zscore(matrix.values, stats), normalization="zscore",
                   mean=stats.mean, std=stats.std)


def apply_normalization(matrix: FeatureMatrix, stats: NormalizationStats) -> FeatureMatrix:
    """Transform held-out rows with statistics computed on training rows."""
    if len(stats.mean) != matrix.n_features:
        raise StructuralError(f"statistics cover {len(stats.mean)} columns, matrix has {matrix.n_features}")
    return replace(matrix, values=_zscore(matrix.values, stats), normalization="zscore",
                   mean=np.asarray(stats.mean), std=np.asarray(stats.std))
