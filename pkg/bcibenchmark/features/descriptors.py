from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from ..errors import StructuralError


class FeatureGroup(str, Enum):
    STATISTIC = "Statistic"
    ENTROPY = "Entropy"
    AR = "AR"
    ENERGY = "Energy"
    DCTDST = "DctDst"
    WAVELET = "Wavelet"

    @property
    def rank(self):
        return list(FeatureGroup).index(self)

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        for group in cls:
            if str(value).lower() in (group.value.lower(), group.name.lower()):
                return group
        raise ValueError(f"unknown feature group {value!r}")


def _sortable(value):
    if isinstance(value, (bool, int, float, np.integer, np.floating)):
        return (0, float(value), "")
    if isinstance(value, (tuple, list)):
        return (1, 0.0, tuple(_sortable(v) for v in value))
    return (2, 0.0, str(value))


def _freeze(value):
    if isinstance(value, (list, tuple)):
        return tuple(_freeze(v) for v in value)
    if isinstance(value, np.generic):
        return value.item()
    return value


@dataclass(frozen=True)
class FeatureDescriptor:
    """Identity of one feature column."""
    group: FeatureGroup
    family: str
    channels: tuple
    params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "group", FeatureGroup.parse(self.group))
        object.__setattr__(self, "channels", tuple(int(c) for c in self.channels))
        object.__setattr__(self, "params", tuple((str(k), _freeze(v)) for k, v in self.params))
        if not self.channels:
            raise StructuralError(f"feature {self.family!r} has no channels")

    @property
    def sort_key(self):
        return (self.group.rank, self.family, self.channels,
                tuple((k, _sortable(v)) for k, v in self.params))

    def param(self, name, default=None):
        return dict(self.params).get(name, default)

    @property
    def label(self):
        params = ",".join(f"{k}={v}" for k, v in self.params)
        channels = "-".join(str(c) for c in self.channels)
        return f"{self.group.value}/{self.family}[{channels}]({params})"

    def to_dict(self):
        return {
            "group": self.group.value,
            "family": self.family,
            "channels": list(self.channels),
            "params": [[k, list(v) if isinstance(v, tuple) else v] for k, v in self.params],
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            group=data["group"],
            family=data["family"],
            channels=tuple(data["channels"]),
            params=tuple((k, v) for k, v in data["params"]),
        )


class FeatureBlock(NamedTuple):
    """Output of one extractor on one trial."""
    values: np.ndarray
    descriptors: list
    degenerate: int = 0


def concat_blocks(blocks):
    if not blocks:
        return FeatureBlock(np.zeros(0), [], 0)
    return FeatureBlock(
        values=np.concatenate([np.asarray(b.values, dtype=float) for b in blocks]),
        descriptors=[d for b in blocks for d in b.descriptors],
        degenerate=sum(b.degenerate for b in blocks),
    )


def trial_samples(trial):
    """Accept a Trial or a bare [channel x time] array."""
    samples = getattr(trial, "samples", trial)
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[np.newaxis, :]
    return samples
