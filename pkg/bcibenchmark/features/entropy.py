"""Group 2: histogram entropies, Lempel-Ziv complexity, ApEn and neural complexity."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import DomainError, PreconditionError
from .descriptors import FeatureBlock, FeatureDescriptor, FeatureGroup, trial_samples

logger = logging.getLogger(__name__)

DEFAULT_Q = (-5.0, -2.0, -1.0, 0.5, 1.5, 2.0, 3.0, 5.0)
MIN_WINDOW = 32


@dataclass(frozen=True)
class EntropyConfig:
    bins: int = 64
    q_values: tuple = DEFAULT_Q
    apen_m: int = 2
    apen_r: float = 0.2             # tolerance as a multiple of the channel std
    neural_complexity: bool = True

    def __post_init__(self):
        if any(q == 1 for q in self.q_values):
            raise DomainError("q = 1 is the Shannon limit; it is reported as the shannon feature")
        if self.bins < 1 or self.apen_m < 1:
            raise DomainError("histogram bins and ApEn embedding dimension must be positive")


def histogram_probabilities(x, bins=64):
    """Occupied-bin probabilities of an equal-width histogram over [min, max]."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise PreconditionError("cannot build a histogram of an empty series")
    lo, hi = x.min(), x.max()
    if hi <= lo:
        return np.ones(1)
    counts, _ = np.histogram(x, bins=bins, range=(lo, hi))
    p = counts[counts > 0] / x.size
    return p


def shannon_entropy(p):
    p = np.asarray(p, dtype=float)
    return float(-np.sum(p * np.log(p)))


def renyi_entropy(p, q):
    if q == 1:
        raise DomainError("Renyi entropy at q = 1 is the Shannon entropy")
    p = np.asarray(p, dtype=float)
    return float(np.log(np.sum(p ** q)) / (1.0 - q))


def tsallis_entropy(p, q):
    if q == 1:
        raise DomainError("Tsallis entropy at q = 1 is the Shannon entropy")
    p = np.asarray(p, dtype=float)
    return float((1.0 - np.sum(p ** q)) / (q - 1.0))


def lz76_phrase_count(bits):
    """Kaspar-Schuster count of LZ76 phrases in a binary sequence."""
    s = np.asarray(bits).astype(np.int8)
    n = s.size
    if n < 2:
        return n
    i, k, l = 0, 1, 1
    c, k_max = 1, 1
    while True:
        if s[i + k - 1] == s[l + k - 1]:
            k += 1
            if l + k > n:
                c += 1
                break
        else:
            k_max = max(k, k_max)
            i += 1
            if i == l:
                c += 1
                l += k_max
                if l + 1 > n:
                    break
                i, k, k_max = 0, 1, 1
            else:
                k = 1
    return c


def binarize(x):
    x = np.asarray(x, dtype=float)
    return (x > np.median(x)).astype(np.int8)


def _phi(x, m, r):
    emb = sliding_window_view(x, m)
    dist = np.abs(emb[:, np.newaxis, :] - emb[np.newaxis, :, :]).max(axis=2)
    return float(np.mean(np.log(np.mean(dist <= r, axis=1))))


def approximate_entropy(x, m=2, r=None):
    """ApEn(m, r); ``r`` defaults to 0.2 x std. Constant series give exactly 0."""
    x = np.asarray(x, dtype=float)
    if x.size <= m + 1:
        raise PreconditionError(f"ApEn with m={m} needs more than {m + 1} samples")
    if r is None:
        r = 0.2 * x.std()
    return _phi(x, m, r) - _phi(x, m + 1, r)


def neural_complexity(samples, ridge=1e-9):
    """Gaussian estimate: sum over channels of MI(channel; all other channels).

    Each term is 1/2 [ln var_i + ln det Sigma_rest - ln det Sigma]; the
    covariance gets a small trace-scaled ridge so rank-deficient windows
    stay finite.
    """
    X = np.asarray(samples, dtype=float)
    n_channels = X.shape[0]
    if n_channels < 2:
        return 0.0, False
    cov = np.atleast_2d(np.cov(X, bias=True))
    scale = np.trace(cov) / n_channels
    if scale <= 0:
        return 0.0, True
    cov = cov + ridge * scale * np.eye(n_channels)
    _, logdet = np.linalg.slogdet(cov)
    total = 0.0
    for i in range(n_channels):
        rest = np.delete(np.delete(cov, i, axis=0), i, axis=1)
        _, logdet_rest = np.linalg.slogdet(rest)
        total += 0.5 * (np.log(cov[i, i]) + logdet_rest - logdet)
    if not np.isfinite(total):
        return 0.0, True
    return max(float(total), 0.0), False


def extract_entropy(trial, cfg: EntropyConfig = EntropyConfig()) -> FeatureBlock:
    X = trial_samples(trial)
    n_channels, n = X.shape
    if n < MIN_WINDOW:
        raise PreconditionError(f"entropy features need at least {MIN_WINDOW} samples per window, got {n}")
    G = FeatureGroup.ENTROPY
    values, descriptors = [], []
    degenerate = 0
    log_scale = np.log2(n) / n

    for ch in range(n_channels):
        x = X[ch]
        p = histogram_probabilities(x, cfg.bins)
        values.append(shannon_entropy(p))
        descriptors.append(FeatureDescriptor(G, "shannon", (ch,), (("bins", cfg.bins),)))
        for q in cfg.q_values:
            values.append(renyi_entropy(p, q))
            descriptors.append(FeatureDescriptor(G, "renyi", (ch,), (("bins", cfg.bins), ("q", q))))
        for q in cfg.q_values:
            values.append(tsallis_entropy(p, q))
            descriptors.append(FeatureDescriptor(G, "tsallis", (ch,), (("bins", cfg.bins), ("q", q))))

        count = lz76_phrase_count(binarize(x))
        values.extend([float(count), count * log_scale])
        descriptors.append(FeatureDescriptor(G, "lz76", (ch,), (("normalized", False),)))
        descriptors.append(FeatureDescriptor(G, "lz76", (ch,), (("normalized", True),)))

        values.append(approximate_entropy(x, cfg.apen_m, cfg.apen_r * x.std()))
        descriptors.append(FeatureDescriptor(G, "apen", (ch,), (("m", cfg.apen_m), ("r", cfg.apen_r))))
        degenerate += bool(np.ptp(x) == 0)

    if cfg.neural_complexity and n_channels > 1:
        value, flagged = neural_complexity(X)
        values.append(value)
        descriptors.append(FeatureDescriptor(G, "neural_complexity", tuple(range(n_channels))))
        degenerate += flagged

    return FeatureBlock(np.asarray(values, dtype=float), descriptors, degenerate)
