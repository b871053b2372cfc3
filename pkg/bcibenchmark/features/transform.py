"""Groups 5 and 6: truncated DCT/DST coefficients and full DWT coefficient vectors."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import pywt
from scipy import fft

from ..errors import DomainError, PreconditionError
from .descriptors import FeatureBlock, FeatureDescriptor, FeatureGroup, concat_blocks, trial_samples

SUPPORTED_WAVELETS = ("haar", "db2", "db3", "db4", "db5")


@dataclass(frozen=True)
class TransformConfig:
    k: int | None = 32              # None keeps the full length


@dataclass(frozen=True)
class WaveletConfig:
    families: tuple = SUPPORTED_WAVELETS
    levels: int = 4


#------------------------------------------------------------------------------
# DCT-II / DST-I
#------------------------------------------------------------------------------
def dct_dst(trial, k=None) -> FeatureBlock:
    X = trial_samples(trial)
    n_channels, n = X.shape
    k = n if k is None else int(k)
    if not 1 <= k <= n:
        raise PreconditionError(f"need 1 <= k <= window length {n}, got k={k}")
    dct = fft.dct(X, type=2, norm="ortho", axis=1)[:, :k]
    dst = fft.dst(X, type=1, norm="ortho", axis=1)[:, :k]
    G = FeatureGroup.DCTDST
    values = np.concatenate([dct, dst], axis=1).reshape(-1)
    descriptors = []
    for ch in range(n_channels):
        descriptors.extend(FeatureDescriptor(G, "dct", (ch,), (("type", 2), ("index", i))) for i in range(k))
        descriptors.extend(FeatureDescriptor(G, "dst", (ch,), (("type", 1), ("index", i))) for i in range(k))
    return FeatureBlock(values, descriptors, 0)


#------------------------------------------------------------------------------
# Discrete wavelet transform, periodic extension
#------------------------------------------------------------------------------
def wavelet_coefficients(x, family, levels):
    """[cA_L, cD_L, ..., cD_1] of ``x`` wrap-padded to a multiple of 2**levels."""
    if family not in SUPPORTED_WAVELETS:
        raise DomainError(f"unsupported wavelet {family!r}; choose from {', '.join(SUPPORTED_WAVELETS)}")
    if levels < 1:
        raise PreconditionError(f"wavelet depth must be positive, got {levels}")
    x = np.asarray(x, dtype=float)
    block = 2 ** levels
    pad = (-x.shape[-1]) % block
    if pad:
        x = np.pad(x, [(0, 0)] * (x.ndim - 1) + [(0, pad)], mode="wrap")
    with warnings.catch_warnings():
        # deep levels on short windows only trigger pywt's boundary-effect warning
        warnings.simplefilter("ignore", UserWarning)
        return pywt.wavedec(x, family, mode="periodization", level=levels, axis=-1)


def wavelet(trial, family, levels=4) -> FeatureBlock:
    X = trial_samples(trial)
    coeffs = wavelet_coefficients(X, family, levels)
    kinds = [("a", levels)] + [("d", levels - i) for i in range(levels)]
    G = FeatureGroup.WAVELET
    descriptors = []
    for ch in range(X.shape[0]):
        for (kind, level), band in zip(kinds, coeffs):
            descriptors.extend(
                FeatureDescriptor(G, family, (ch,), (("level", level), ("kind", kind), ("index", i)))
                for i in range(band.shape[-1])
            )
    values = np.concatenate(coeffs, axis=-1).reshape(-1)
    return FeatureBlock(values, descriptors, 0)


def extract_wavelets(trial, cfg: WaveletConfig = WaveletConfig()) -> FeatureBlock:
    return concat_blocks([wavelet(trial, family, cfg.levels) for family in cfg.families])
