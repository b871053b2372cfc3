"""Group 4: periodogram energy per frequency band."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft

from ..errors import DomainError
from .descriptors import FeatureBlock, FeatureDescriptor, FeatureGroup, trial_samples

CLASSIC_BANDS = {
    "delta": (0.5, 4.0),
    "theta": (4.0, 8.0),
    "alpha": (8.0, 13.0),
    "beta": (13.0, 22.0),
}


@dataclass(frozen=True)
class EnergyConfig:
    bands: tuple | None = None      # explicit (low, high) list replaces the default layout
    fine_start: float = 0.5
    fine_stop: float = 45.0
    fine_width: float = 2.0


def band_layout(cfg: EnergyConfig = EnergyConfig()):
    """Classic bands followed by contiguous fine bins that fit below fine_stop."""
    if cfg.bands is not None:
        return tuple((float(lo), float(hi)) for lo, hi in cfg.bands)
    bands = list(CLASSIC_BANDS.values())
    low = cfg.fine_start
    while low + cfg.fine_width <= cfg.fine_stop + 1e-9:
        bands.append((round(low, 6), round(low + cfg.fine_width, 6)))
        low += cfg.fine_width
    return tuple(bands)


def band_name(band):
    for name, edges in CLASSIC_BANDS.items():
        if tuple(band) == edges:
            return name
    return f"{band[0]:g}-{band[1]:g}Hz"


def bin_energies(x, fs):
    """One-sided periodogram energies; they sum to sum(x**2)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    spectrum = np.abs(fft.rfft(x, axis=-1)) ** 2 / n
    if n % 2 == 0:
        spectrum[..., 1:-1] *= 2
    else:
        spectrum[..., 1:] *= 2
    return fft.rfftfreq(n, 1.0 / fs), spectrum


def _band_mask(freqs, low, high, fs):
    if not (0 <= low < high <= fs / 2):
        raise DomainError(f"band ({low}, {high}) lies outside [0, {fs / 2}] Hz")
    mask = (freqs >= low) & (freqs < high)
    if high == fs / 2:
        mask |= freqs == high
    return mask


def band_energy(trial, bands, fs=None) -> FeatureBlock:
    X = trial_samples(trial)
    fs = fs if fs is not None else getattr(trial, "fs", None)
    if fs is None:
        raise DomainError("band energy needs the sampling rate")
    freqs, spectrum = bin_energies(X, fs)
    masks = [_band_mask(freqs, lo, hi, fs) for lo, hi in bands]
    values = np.stack([spectrum[:, m].sum(axis=1) for m in masks], axis=1)
    descriptors = [
        FeatureDescriptor(FeatureGroup.ENERGY, "band_energy", (ch,), (("band", (float(lo), float(hi))),))
        for ch in range(X.shape[0]) for lo, hi in bands
    ]
    return FeatureBlock(values.reshape(-1), descriptors, 0)


def extract_energy(trial, cfg: EnergyConfig = EnergyConfig(), fs=None) -> FeatureBlock:
    return band_energy(trial, band_layout(cfg), fs=fs)
