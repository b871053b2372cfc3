"""Group 1: moments, correlations, form factor and joint cumulants."""
from __future__ import annotations

import functools
import itertools
import logging
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, PreconditionError
from .descriptors import FeatureBlock, FeatureDescriptor, FeatureGroup, trial_samples

logger = logging.getLogger(__name__)

MIN_WINDOW = 8
_EPS = 1e-300


@dataclass(frozen=True)
class StatisticsConfig:
    max_moment_order: int = 5
    max_cumulant_order: int = 4
    max_triples: int = 200
    max_quadruples: int = 100
    seed: int = 0


def central_moment(x, order):
    x = np.asarray(x, dtype=float)
    return float(np.mean((x - x.mean()) ** order))


def joint_cumulant(*centered):
    """Joint cumulant of 1 to 4 zero-mean series (population moments).

    Arrays broadcast; the last axis is time. Repeating an argument gives the
    mixed cumulants, e.g. ``joint_cumulant(x, x, y)``.
    """
    n = len(centered)
    if n == 1:
        return np.mean(centered[0], axis=-1)
    if n == 2:
        a, b = centered
        return np.mean(a * b, axis=-1)
    if n == 3:
        a, b, c = centered
        return np.mean(a * b * c, axis=-1)
    if n == 4:
        a, b, c, d = centered
        m = lambda u, v: np.mean(u * v, axis=-1)
        return np.mean(a * b * c * d, axis=-1) - m(a, b) * m(c, d) - m(a, c) * m(b, d) - m(a, d) * m(b, c)
    raise DomainError(f"joint cumulants are implemented up to order 4, got {n}")


@functools.lru_cache(maxsize=64)
def channel_tuples(n_channels, size, cap, seed):
    """All channel combinations of ``size``, or a seeded sample of ``cap`` of them."""
    combos = list(itertools.combinations(range(n_channels), size))
    if cap is None or len(combos) <= cap:
        return tuple(combos)
    rng = np.random.default_rng([seed, n_channels, size])
    picked = np.sort(rng.choice(len(combos), size=cap, replace=False))
    return tuple(combos[i] for i in picked)


def _multiplicities(size, order):
    """Compositions of ``order`` into ``size`` positive parts, lexicographic."""
    if size == 1:
        return [(order,)] if order >= 1 else []
    out = []
    for first in range(1, order - size + 2):
        out.extend((first,) + rest for rest in _multiplicities(size - 1, order - first))
    return out


def _form_factor(x):
    d1 = np.diff(x)
    d2 = np.diff(d1)
    sx, s1, s2 = x.std(), d1.std(), d2.std()
    if sx <= _EPS or s1 <= _EPS:
        return 0.0, True
    return float((s2 / s1) / (s1 / sx)), False


def extract_statistics(trial, cfg: StatisticsConfig = StatisticsConfig()) -> FeatureBlock:
    X = trial_samples(trial)
    n_channels, n = X.shape
    if n < MIN_WINDOW:
        raise PreconditionError(f"statistics need at least {MIN_WINDOW} samples per window, got {n}")
    G = FeatureGroup.STATISTIC
    values, descriptors = [], []
    degenerate = 0

    centered = X - X.mean(axis=1, keepdims=True)
    std = centered.std(axis=1)
    for ch in range(n_channels):
        for order in range(1, cfg.max_moment_order + 1):
            values.append(float(np.mean(centered[ch] ** order)))
            descriptors.append(FeatureDescriptor(G, "moment", (ch,), (("order", order),)))
        values.append(float(std[ch] ** 2))
        descriptors.append(FeatureDescriptor(G, "variance", (ch,)))
        ff, flagged = _form_factor(X[ch])
        degenerate += flagged
        values.append(ff)
        descriptors.append(FeatureDescriptor(G, "form_factor", (ch,)))

    pairs = list(itertools.combinations(range(n_channels), 2))
    if pairs:
        I = np.array([p[0] for p in pairs])
        J = np.array([p[1] for p in pairs])
        a, b = centered[I], centered[J]
        cov = np.mean(a * b, axis=1)
        denom = std[I] * std[J]
        zero = denom <= _EPS
        corr = np.where(zero, 0.0, cov / np.where(zero, 1.0, denom))
        degenerate += int(zero.sum())
        joint = [(p, q) for p in range(1, cfg.max_moment_order) for q in range(1, cfg.max_moment_order)
                 if p + q <= cfg.max_moment_order]
        moments = {pq: np.mean(a ** pq[0] * b ** pq[1], axis=1) for pq in joint}
        cumulants = {}
        for order in range(2, cfg.max_cumulant_order + 1):
            for mult in _multiplicities(2, order):
                cumulants[mult] = joint_cumulant(*([a] * mult[0] + [b] * mult[1]))
        for k, pair in enumerate(pairs):
            values.append(float(corr[k]))
            descriptors.append(FeatureDescriptor(G, "correlation", pair))
            for pq in joint:
                values.append(float(moments[pq][k]))
                descriptors.append(FeatureDescriptor(G, "joint_moment", pair, (("p", pq[0]), ("q", pq[1]))))
            for mult, cum in cumulants.items():
                values.append(float(cum[k]))
                descriptors.append(FeatureDescriptor(
                    G, "cumulant", pair, (("order", sum(mult)), ("multiplicity", mult))))

    for size, cap in ((3, cfg.max_triples), (4, cfg.max_quadruples)):
        if size > cfg.max_cumulant_order or n_channels < size:
            continue
        tuples = channel_tuples(n_channels, size, cap, cfg.seed)
        if not tuples:
            continue
        idx = np.array(tuples)
        parts = [centered[idx[:, i]] for i in range(size)]
        for order in range(size, cfg.max_cumulant_order + 1):
            for mult in _multiplicities(size, order):
                args = [p for p, m in zip(parts, mult) for _ in range(m)]
                cum = joint_cumulant(*args)
                for k, channels in enumerate(tuples):
                    values.append(float(cum[k]))
                    descriptors.append(FeatureDescriptor(
                        G, "cumulant", channels, (("order", order), ("multiplicity", mult))))

    return FeatureBlock(np.asarray(values, dtype=float), descriptors, degenerate)
