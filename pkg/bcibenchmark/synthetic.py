"""Seeded two-class recordings with known content, used as test oracles.

A generator spec lists, per class, the sources summed onto the channels.
The recording alternates class segments (optionally in shuffled order) and
labels every sample with the class of its segment.

    fs: 512
    channels: 4
    segment_seconds: 10
    segments_per_class: 3
    classes:
      - sources:
          - {kind: noise, amplitude: 1.0}
          - {kind: bandnoise, band: [8, 13], amplitude: 2.0, channels: [0, 1]}
      - sources:
          - {kind: noise, amplitude: 1.0}
          - {kind: bandnoise, band: [16, 24], amplitude: 2.0, channels: [0, 1]}
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from ruamel.yaml import YAML
from scipy import signal

from .errors import ConfigError
from .signals import Recording

logger = logging.getLogger(__name__)

SOURCE_KINDS = ("sine", "noise", "bandnoise", "ar")
BURN_IN = 512


@dataclass(frozen=True)
class SourceModel:
    kind: str
    amplitude: float = 1.0
    freq: float = 0.0
    phase: float | None = 0.0       # None draws a uniform random phase per segment
    band: tuple = ()
    coeffs: tuple = ()
    channels: tuple = ()            # empty means every channel
    jitter: float = 0.0             # relative amplitude spread across segments


@dataclass(frozen=True)
class SynthSpec:
    classes: tuple                  # tuple of tuples of SourceModel, one per class
    fs: float = 512.0
    n_channels: int = 4
    segment_seconds: float = 10.0
    segments_per_class: int = 3
    shuffle: bool = False
    channel_names: tuple = ()

    @property
    def segment_len(self):
        return int(round(self.segment_seconds * self.fs))


#------------------------------------------------------------------------------
# Spec parsing
#------------------------------------------------------------------------------
def _source_from_mapping(item, where, n_channels, fs, problems):
    if not isinstance(item, dict):
        problems.append(f"{where}: expected a mapping, got {item!r}")
        return None
    kind = item.get("kind")
    if kind not in SOURCE_KINDS:
        problems.append(f"{where}.kind: must be one of {', '.join(SOURCE_KINDS)}, got {kind!r}")
        return None
    unknown = set(item) - {"kind", "amplitude", "freq", "phase", "band", "coeffs", "channels", "jitter"}
    if unknown:
        problems.append(f"{where}: unknown keys {sorted(unknown)}")
    try:
        source = SourceModel(
            kind=kind,
            amplitude=float(item.get("amplitude", 1.0)),
            freq=float(item.get("freq", 0.0)),
            phase=None if item.get("phase", 0.0) == "random" else float(item.get("phase", 0.0)),
            band=tuple(float(b) for b in item.get("band", ())),
            coeffs=tuple(float(c) for c in item.get("coeffs", ())),
            channels=tuple(int(c) for c in item.get("channels", ())),
            jitter=float(item.get("jitter", 0.0)),
        )
    except (TypeError, ValueError) as err:
        problems.append(f"{where}: {err}")
        return None

    if source.amplitude < 0 or source.jitter < 0:
        problems.append(f"{where}: amplitude and jitter must be non-negative")
    if any(not 0 <= c < n_channels for c in source.channels):
        problems.append(f"{where}.channels: indices must lie in [0, {n_channels})")
    if kind == "sine" and not 0 < source.freq < fs / 2:
        problems.append(f"{where}.freq: must lie in (0, {fs / 2})")
    if kind == "bandnoise" and (len(source.band) != 2 or not 0 < source.band[0] < source.band[1] < fs / 2):
        problems.append(f"{where}.band: need [low, high] with 0 < low < high < {fs / 2}")
    if kind == "ar":
        if not source.coeffs:
            problems.append(f"{where}.coeffs: an AR source needs at least one coefficient")
        elif np.any(np.abs(np.roots(np.r_[1.0, -np.asarray(source.coeffs)])) >= 1):
            problems.append(f"{where}.coeffs: AR process is not stationary")
    return source


def synth_spec_from_mapping(data) -> SynthSpec:
    """Validate a generator spec; every problem found becomes one diagnostic."""
    if not isinstance(data, dict):
        raise ConfigError(["synth: expected a mapping"])
    problems = []
    try:
        fs = float(data.get("fs", 512.0))
        names = tuple(str(n) for n in data.get("channel_names", ()))
        n_channels = int(data.get("channels", len(names) or 4))
        segment_seconds = float(data.get("segment_seconds", 10.0))
        segments_per_class = int(data.get("segments_per_class", 3))
    except (TypeError, ValueError) as err:
        raise ConfigError([f"synth: {err}"]) from err
    if fs <= 0:
        problems.append("synth.fs: must be positive")
    if n_channels < 1:
        problems.append("synth.channels: need at least one channel")
    if names and len(names) != n_channels:
        problems.append(f"synth.channel_names: {len(names)} names for {n_channels} channels")
    if segment_seconds <= 0 or segments_per_class < 1:
        problems.append("synth: segment_seconds and segments_per_class must be positive")

    raw_classes = data.get("classes")
    if not isinstance(raw_classes, list) or len(raw_classes) < 2:
        problems.append("synth.classes: need a list of at least two classes")
        raw_classes = []
    classes = []
    for ci, entry in enumerate(raw_classes):
        items = entry.get("sources") if isinstance(entry, dict) else entry
        if not isinstance(items, list) or not items:
            problems.append(f"synth.classes[{ci}].sources: need a non-empty list")
            continue
        sources = [_source_from_mapping(item, f"synth.classes[{ci}].sources[{si}]", n_channels, fs, problems)
                   for si, item in enumerate(items)]
        classes.append(tuple(s for s in sources if s is not None))
    if problems:
        raise ConfigError(problems)

    return SynthSpec(
        classes=tuple(classes),
        fs=fs,
        n_channels=n_channels,
        segment_seconds=segment_seconds,
        segments_per_class=segments_per_class,
        shuffle=bool(data.get("shuffle", False)),
        channel_names=names,
    )


def load_synth_spec(path) -> SynthSpec:
    yaml = YAML(typ="safe")
    with open(path) as f:
        data = yaml.load(f)
    return synth_spec_from_mapping(data)


def bundled_spec_path(name="planted"):
    return Path(__file__).parent / "data" / f"{name}.yaml"


#------------------------------------------------------------------------------
# Generation
#------------------------------------------------------------------------------
def _render(source: SourceModel, n, fs, rng):
    amplitude = source.amplitude
    if source.jitter:
        amplitude *= max(0.0, 1.0 + source.jitter * rng.standard_normal())
    if source.kind == "sine":
        phase = rng.uniform(0, 2 * np.pi) if source.phase is None else source.phase
        t = np.arange(n) / fs
        return amplitude * np.sin(2 * np.pi * source.freq * t + phase)
    if source.kind == "noise":
        return amplitude * rng.standard_normal(n)
    if source.kind == "bandnoise":
        sos = signal.butter(4, source.band, btype="bandpass", fs=fs, output="sos")
        x = signal.sosfilt(sos, rng.standard_normal(n + BURN_IN))[BURN_IN:]
        std = x.std()
        return amplitude * x / std if std > 0 else x
    # ar
    burn = BURN_IN + 10 * len(source.coeffs)
    e = rng.standard_normal(n + burn)
    x = signal.lfilter([1.0], np.r_[1.0, -np.asarray(source.coeffs)], e)[burn:]
    return amplitude * x


def synth_recording(spec: SynthSpec, seed) -> Recording:
    """Deterministic for a fixed (spec, seed)."""
    rng = np.random.default_rng(seed)
    n_classes = len(spec.classes)
    order = np.repeat(np.arange(n_classes), spec.segments_per_class)
    if spec.shuffle:
        order = rng.permutation(order)

    seg_len = spec.segment_len
    blocks = []
    for cls in order:
        block = np.zeros((spec.n_channels, seg_len))
        for source in spec.classes[cls]:
            for ch in (source.channels or range(spec.n_channels)):
                block[ch] += _render(source, seg_len, spec.fs, rng)
        blocks.append(block)

    logger.debug("Generated %d segments of %d samples (seed %s)", len(order), seg_len, seed)
    return Recording(
        samples=np.concatenate(blocks, axis=1),
        fs=spec.fs,
        channel_names=spec.channel_names,
        labels=np.repeat(order, seg_len),
        name=f"synth{seed}",
    )
