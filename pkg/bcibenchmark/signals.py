"""Recordings, trials and the preprocessing chain.

A recording is one session matrix ``[channel x time]`` sampled at ``fs``
with an optional per-sample task label. Preprocessing is a fixed
pipeline: zero-phase band-pass, decimation, then fixed-length overlapping
windows ("trials") that each carry a single label.
"""
from __future__ import annotations

import csv
import itertools
import logging
import os
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import signal

from . import Utils
from .errors import DomainError, MalformedInputError, PreconditionError, StructuralError

logger = logging.getLogger(__name__)

# montage of the IDIAP mental-imagery recordings, in file column order
IDIAP_CHANNELS = (
    "Fp1", "AF3", "F7", "F3", "FC1", "FC5", "T7", "C3",
    "CP1", "CP5", "P7", "P3", "Pz", "PO3", "O1", "Oz",
    "O2", "PO4", "P4", "P8", "CP6", "CP2", "C4", "T8",
    "FC6", "FC2", "F4", "F8", "AF4", "Fp2", "Fz", "Cz",
)
# label codes used by the IDIAP raw files: left hand, right hand, word generation
IDIAP_TASKS = (2, 3, 7)

DEFAULT_HIGHPASS_ORDER = 4
DEFAULT_LOWPASS_ORDER = 16


class RecordingFormat(str, Enum):
    ASCII = "ascii-matrix"
    CSV = "csv"


def _readonly(array):
    array.setflags(write=False)
    return array


# ==============================================================================
# Domain types
# ==============================================================================
@dataclass(frozen=True, eq=False)
class Recording:
    samples: np.ndarray
    fs: float
    channel_names: tuple = ()
    labels: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if samples.ndim == 1:
            samples = samples[np.newaxis, :]
        if samples.ndim != 2 or samples.shape[0] < 1 or samples.shape[1] < 1:
            raise StructuralError(f"recording needs a non-empty [channel x time] matrix, got shape {samples.shape}")
        if not np.isfinite(self.fs) or self.fs <= 0:
            raise DomainError(f"sampling rate must be positive, got {self.fs}")
        names = tuple(self.channel_names) or tuple(f"ch{i}" for i in range(samples.shape[0]))
        if len(names) != samples.shape[0]:
            raise StructuralError(f"{len(names)} channel names for {samples.shape[0]} channels")
        labels = self.labels
        if labels is not None:
            labels = np.array(labels, dtype=np.int64).reshape(-1)
            if labels.shape[0] != samples.shape[1]:
                raise StructuralError(f"{labels.shape[0]} labels for {samples.shape[1]} samples")
            if labels.size and labels.min() < 0:
                raise DomainError("class labels must be non-negative integers")
            labels = _readonly(labels)
        object.__setattr__(self, "samples", _readonly(samples))
        object.__setattr__(self, "fs", float(self.fs))
        object.__setattr__(self, "channel_names", names)
        object.__setattr__(self, "labels", labels)

    @property
    def n_channels(self):
        return self.samples.shape[0]

    @property
    def n_samples(self):
        return self.samples.shape[1]

    @property
    def duration(self):
        return self.n_samples / self.fs


@dataclass(frozen=True, eq=False)
class Trial:
    samples: np.ndarray
    label: int
    fs: float
    origin: tuple = ("", 0)

    @property
    def n_channels(self):
        return self.samples.shape[0]

    @property
    def window_len(self):
        return self.samples.shape[1]


@dataclass(frozen=True)
class DatasetSpec:
    """One two-class dataset: a subject, two of its tasks, and where the data lives."""
    name: str
    subject: str
    tasks: tuple
    paths: tuple = ()
    format: str = RecordingFormat.CSV.value
    fs: float = 512.0
    header: bool = False
    label_column: int | None = -1
    delimiter: str | None = None
    synth: object = None
    synth_seed: int = 0

    def __post_init__(self):
        tasks = tuple(int(t) for t in self.tasks)
        if len(tasks) != 2 or tasks[0] == tasks[1]:
            raise DomainError(f"dataset {self.name!r}: a task pair needs exactly two distinct tasks, got {self.tasks}")
        object.__setattr__(self, "tasks", tasks)
        object.__setattr__(self, "paths", tuple(str(p) for p in self.paths))
        if not self.paths and self.synth is None:
            raise DomainError(f"dataset {self.name!r}: no source files and no generator spec")


def task_pair_datasets(subject_files: Mapping[str, Sequence[str]], tasks=IDIAP_TASKS, **load_options):
    """Two-class datasets for every task pair of every subject, subjects first, pairs in task order."""
    datasets = []
    for subject, paths in subject_files.items():
        for first, second in itertools.combinations(tasks, 2):
            datasets.append(DatasetSpec(
                name=f"{subject}-{first}v{second}",
                subject=str(subject),
                tasks=(first, second),
                paths=tuple(paths),
                **load_options,
            ))
    return datasets


# ==============================================================================
# Matrix files
# ==============================================================================
def _split_rows(handle, fmt, delimiter):
    if RecordingFormat(fmt) is RecordingFormat.CSV:
        reader = csv.reader(handle, delimiter=delimiter or ",")
        for lineno, row in enumerate(reader, start=1):
            cells = [c.strip() for c in row]
            if cells and any(cells):
                yield lineno, cells
    else:
        for lineno, line in enumerate(handle, start=1):
            cells = line.split(delimiter) if delimiter else line.split()
            cells = [c.strip() for c in cells if c.strip()]
            if cells:
                yield lineno, cells


def load_recording(path, format=RecordingFormat.CSV, fs=512.0, header=False,
                   label_column=None, delimiter=None, name=None) -> Recording:
    """Read one session matrix; rows are time, columns are channels.

    ``label_column`` (may be negative) designates the column holding the
    per-sample class id; it is removed from the channel list.
    """
    fmt = RecordingFormat(format)
    rows = []
    names = None
    width = None
    with open(path, newline="" if fmt is RecordingFormat.CSV else None) as handle:
        for lineno, cells in _split_rows(handle, fmt, delimiter):
            if header and names is None:
                names = cells
                width = len(cells)
                continue
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise StructuralError(f"{path}:{lineno}: expected {width} columns, found {len(cells)}")
            try:
                rows.append([float(c) for c in cells])
            except ValueError as err:
                raise MalformedInputError(f"cannot parse number ({err})", path=path, line=lineno) from err
    if not rows:
        raise StructuralError(f"{path}: no data rows")

    data = np.asarray(rows, dtype=float)
    labels = None
    if label_column is not None:
        column = label_column % data.shape[1]
        raw = data[:, column]
        if not np.all(np.isfinite(raw)) or np.any(raw != np.round(raw)) or np.any(raw < 0):
            raise MalformedInputError(f"label column {label_column} must hold non-negative integers", path=path)
        labels = raw.astype(np.int64)
        data = np.delete(data, column, axis=1)
        if names is not None:
            names = [n for i, n in enumerate(names) if i != column]
    if data.shape[1] == 0:
        raise StructuralError(f"{path}: no channel columns besides the label column")

    logger.debug("Loaded %s: %d channels x %d samples", path, data.shape[1], data.shape[0])
    return Recording(
        samples=data.T,
        fs=fs,
        channel_names=tuple(names) if names else (),
        labels=labels,
        name=name if name is not None else os.path.basename(str(path)),
    )


def save_recording(rec: Recording, path, format=RecordingFormat.CSV, header=False):
    """Write ``rec`` in the layout ``load_recording`` reads (labels as last column)."""
    fmt = RecordingFormat(format)
    sep = "," if fmt is RecordingFormat.CSV else " "
    columns = [rec.samples[i] for i in range(rec.n_channels)]
    with Utils.atomic_open(path, "w") as f:
        if header:
            names = list(rec.channel_names) + (["label"] if rec.labels is not None else [])
            f.write(sep.join(names) + "\n")
        for t in range(rec.n_samples):
            cells = [repr(float(col[t])) for col in columns]
            if rec.labels is not None:
                cells.append(str(int(rec.labels[t])))
            f.write(sep.join(cells) + "\n")


# ==============================================================================
# Preprocessing
# ==============================================================================
def design_bandpass(low, high, fs, highpass_order=DEFAULT_HIGHPASS_ORDER,
                    lowpass_order=DEFAULT_LOWPASS_ORDER):
    """Butterworth high-pass and low-pass sections stacked into one SOS cascade."""
    if not (0 < low < high < fs / 2):
        raise DomainError(f"band edges must satisfy 0 < low < high < fs/2, got {low}..{high} at fs={fs}")
    hp = signal.butter(highpass_order, low, btype="highpass", fs=fs, output="sos")
    lp = signal.butter(lowpass_order, high, btype="lowpass", fs=fs, output="sos")
    return np.vstack([hp, lp])


def bandpass(rec: Recording, low, high, highpass_order=DEFAULT_HIGHPASS_ORDER,
             lowpass_order=DEFAULT_LOWPASS_ORDER) -> Recording:
    """Zero-phase (forward-backward) band-pass of every channel."""
    sos = design_bandpass(low, high, rec.fs, highpass_order, lowpass_order)
    padlen = min(3 * (2 * len(sos) + 1), rec.n_samples - 1)
    filtered = signal.sosfiltfilt(sos, rec.samples, axis=1, padlen=padlen)
    return replace(rec, samples=filtered)


def downsample(rec: Recording, target_fs) -> Recording:
    """Keep every (fs / target_fs)-th sample; the caller band-limits first."""
    if target_fs <= 0:
        raise DomainError(f"target rate must be positive, got {target_fs}")
    ratio = rec.fs / target_fs
    step = int(round(ratio))
    if step < 1 or abs(ratio - step) > 1e-9:
        raise DomainError(f"cannot decimate {rec.fs} Hz to {target_fs} Hz: ratio {ratio:g} is not an integer")
    labels = rec.labels[::step] if rec.labels is not None else None
    return replace(rec, samples=rec.samples[:, ::step], fs=float(target_fs), labels=labels)


def segment(rec: Recording, window_s, hop_s) -> list:
    """Overlapping windows starting at 0, hop, 2*hop, ...

    Each trial takes the majority label of its window; windows with a tied
    majority (task switches) are dropped. Too-short recordings give [].
    """
    if window_s <= 0 or not (0 < hop_s <= window_s):
        raise PreconditionError(f"need window > 0 and 0 < hop <= window, got window={window_s} hop={hop_s}")
    if rec.labels is None:
        raise PreconditionError(f"recording {rec.name!r} has no labels to segment by")
    window_len = int(round(window_s * rec.fs))
    hop_len = int(round(hop_s * rec.fs))
    if window_len < 1 or hop_len < 1:
        raise PreconditionError(f"window/hop shorter than one sample at fs={rec.fs}")
    if rec.n_samples < window_len:
        return []

    trials = []
    dropped = 0
    for start in range(0, rec.n_samples - window_len + 1, hop_len):
        counts = np.bincount(rec.labels[start:start + window_len])
        top = counts.max()
        if np.count_nonzero(counts == top) > 1:
            dropped += 1
            continue
        trials.append(Trial(
            samples=rec.samples[:, start:start + window_len],
            label=int(np.argmax(counts)),
            fs=rec.fs,
            origin=(rec.name, start),
        ))
    if dropped:
        logger.info("%s: dropped %d windows with a tied label majority", rec.name, dropped)
    return trials


def select_task_pair(trials: Iterable[Trial], tasks) -> list:
    """Keep trials of the two tasks and relabel them 0 (first task) and 1 (second)."""
    mapping = {int(tasks[0]): 0, int(tasks[1]): 1}
    return [replace(t, label=mapping[t.label]) for t in trials if t.label in mapping]


@dataclass(frozen=True)
class PreprocessConfig:
    low: float = 0.5
    high: float = 45.0
    target_fs: float = 128.0
    window_s: float = 1.0
    hop_s: float = 0.5
    highpass_order: int = DEFAULT_HIGHPASS_ORDER
    lowpass_order: int = DEFAULT_LOWPASS_ORDER

    def as_dict(self):
        return {
            "low": self.low, "high": self.high, "target_fs": self.target_fs,
            "window_s": self.window_s, "hop_s": self.hop_s,
            "highpass_order": self.highpass_order, "lowpass_order": self.lowpass_order,
        }


def preprocess(rec: Recording, cfg: PreprocessConfig) -> Recording:
    filtered = bandpass(rec, cfg.low, cfg.high, cfg.highpass_order, cfg.lowpass_order)
    if cfg.target_fs and cfg.target_fs != rec.fs:
        filtered = downsample(filtered, cfg.target_fs)
    return filtered


def dataset_recordings(spec: DatasetSpec) -> list:
    """Raw recordings of a dataset, loaded from files or generated."""
    if spec.synth is not None:
        from .synthetic import synth_recording
        rec = synth_recording(spec.synth, spec.synth_seed)
        return [replace(rec, name=f"{spec.name}#synth{spec.synth_seed}")]
    return [
        load_recording(path, format=spec.format, fs=spec.fs, header=spec.header,
                       label_column=spec.label_column, delimiter=spec.delimiter)
        for path in spec.paths
    ]


def dataset_trials(spec: DatasetSpec, cfg: PreprocessConfig) -> list:
    """Preprocess, window and relabel every recording of ``spec``."""
    trials = []
    for rec in dataset_recordings(spec):
        windows = segment(preprocess(rec, cfg), cfg.window_s, cfg.hop_s)
        trials.extend(select_task_pair(windows, spec.tasks))
    logger.info("Dataset %s: %d trials (%d / %d)", spec.name, len(trials),
                sum(t.label == 0 for t in trials), sum(t.label == 1 for t in trials))
    return trials
