"""Train/test protocol and the per-family selection counts behind the report."""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError, PreconditionError, StructuralError
from .features import FeatureDescriptor, FeatureGroup
from .features.energy import band_name

logger = logging.getLogger(__name__)

MIN_TRIALS = 6


class SplitMode(str, Enum):
    STRATIFIED = "stratified"
    CHRONOLOGICAL = "chronological"


@dataclass(frozen=True)
class EvaluationConfig:
    ratio: float = 2.0 / 3.0
    mode: SplitMode = SplitMode.STRATIFIED
    overlap_guard: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mode", SplitMode(self.mode))
        if not 0 < self.ratio < 1:
            raise DomainError(f"train ratio must lie in (0, 1), got {self.ratio}")

    def to_dict(self):
        return {"ratio": self.ratio, "mode": self.mode.value, "overlap_guard": self.overlap_guard}


@dataclass(frozen=True, eq=False)
class SplitPlan:
    train: np.ndarray
    test: np.ndarray
    mode: SplitMode
    ratio: float
    seed: int = 0
    # test windows removed by the overlap guard
    dropped: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def to_dict(self):
        return {"train": self.train.tolist(), "test": self.test.tolist(), "dropped": self.dropped.tolist(),
                "mode": self.mode.value, "ratio": self.ratio, "seed": self.seed}


def _overlapping(train, test, origins, window_len):
    by_recording = {}
    for i in train:
        by_recording.setdefault(origins[i][0], []).append(origins[i][1])
    starts = {rec: np.array(v) for rec, v in by_recording.items()}
    keep, drop = [], []
    for i in test:
        rec, start = origins[i]
        near = starts.get(rec)
        if near is not None and np.any(np.abs(near - start) < window_len):
            drop.append(i)
        else:
            keep.append(i)
    return np.array(keep, dtype=np.int64), np.array(drop, dtype=np.int64)


def make_split(labels, ratio=2.0 / 3.0, mode=SplitMode.STRATIFIED, seed=0, origins=None,
               overlap_guard=False, window_len=None) -> SplitPlan:
    """Stratified-random or chronological train/test split of trial indices.

    With ``overlap_guard`` the test windows that overlap a training window of
    the same recording (``origins`` = (recording, start) per trial) are moved
    to ``dropped``.
    """
    labels = np.asarray(labels).reshape(-1)
    mode = SplitMode(mode)
    n = labels.shape[0]
    if n < MIN_TRIALS:
        raise DomainError(f"need at least {MIN_TRIALS} trials to split, got {n}")
    if not set(np.unique(labels)) >= {0, 1}:
        raise DomainError("both classes must be present before splitting")
    if not 0 < ratio < 1:
        raise DomainError(f"train ratio must lie in (0, 1), got {ratio}")

    if mode is SplitMode.STRATIFIED:
        rng = np.random.default_rng(seed)
        train, test = [], []
        for cls in np.unique(labels):
            idx = rng.permutation(np.flatnonzero(labels == cls))
            n_train = int(np.floor(ratio * idx.size + 0.5))
            train.extend(idx[:n_train])
            test.extend(idx[n_train:])
        train = np.sort(np.array(train, dtype=np.int64))
        test = np.sort(np.array(test, dtype=np.int64))
    else:
        n_train = int(np.floor(ratio * n + 0.5))
        train = np.arange(n_train, dtype=np.int64)
        test = np.arange(n_train, n, dtype=np.int64)

    dropped = np.zeros(0, dtype=np.int64)
    if overlap_guard:
        if origins is None or window_len is None:
            raise PreconditionError("the overlap guard needs trial origins and the window length")
        test, dropped = _overlapping(train, test, origins, window_len)
        logger.info("Overlap guard dropped %d of %d test windows", dropped.size, dropped.size + test.size)
    return SplitPlan(train=train, test=test, mode=mode, ratio=float(ratio), seed=int(seed), dropped=dropped)


def accuracy(pred, truth):
    """Percentage of correct labels."""
    pred = np.asarray(pred).reshape(-1)
    truth = np.asarray(truth).reshape(-1)
    if pred.shape != truth.shape:
        raise StructuralError(f"{pred.size} predictions for {truth.size} labels")
    if truth.size == 0:
        raise PreconditionError("accuracy of an empty set is undefined")
    return 100.0 * float(np.mean(pred == truth))


#------------------------------------------------------------------------------
# Selection distributions
#------------------------------------------------------------------------------
def _descriptor(d):
    return d if isinstance(d, FeatureDescriptor) else FeatureDescriptor.from_dict(d)


def _selected(subset, descriptors):
    if descriptors is None:
        return [_descriptor(d) for d in subset.descriptors]
    for i in subset.indices:
        if not 0 <= i < len(descriptors):
            raise StructuralError(f"subset refers to column {i}; the matrix has {len(descriptors)}")
    return [_descriptor(descriptors[i]) for i in subset.indices]


def feature_family_distribution(subsets, descriptors=None, group=None):
    """{classifier: {family: count}} over the selected columns.

    ``descriptors`` maps column index to descriptor; without it the
    descriptors stored in each subset are used. ``group`` restricts the count
    to one feature group.
    """
    group = FeatureGroup.parse(group) if group is not None else None
    out = {}
    for subset in subsets:
        counts = out.setdefault(subset.classifier, Counter())
        for d in _selected(subset, descriptors):
            if group is None or d.group is group:
                counts[d.family] += 1
    return {clf: dict(sorted(c.items())) for clf, c in out.items()}


def band_distribution(subsets, descriptors=None):
    """{classifier: {band: count}} over the selected band-energy columns."""
    out = {}
    for subset in subsets:
        counts = out.setdefault(subset.classifier, Counter())
        for d in _selected(subset, descriptors):
            if d.family == "band_energy":
                counts[band_name(d.param("band"))] += 1
    return {clf: dict(sorted(c.items())) for clf, c in out.items()}
