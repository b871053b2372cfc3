import numpy as np
import pytest

from bcibenchmark.errors import DomainError, MalformedInputError, PreconditionError, StructuralError
from bcibenchmark.signals import (
    DatasetSpec,
    PreprocessConfig,
    Recording,
    RecordingFormat,
    Trial,
    bandpass,
    dataset_trials,
    design_bandpass,
    downsample,
    load_recording,
    save_recording,
    segment,
    select_task_pair,
    task_pair_datasets,
)


def _step_recording():
    labels = np.r_[np.zeros(10, dtype=int), np.ones(10, dtype=int)]
    return Recording(samples=np.arange(20.0), fs=10.0, labels=labels, name="step")


def test_recording_promotes_single_channel():
    rec = Recording(samples=np.arange(5.0), fs=100.0)
    assert rec.samples.shape == (1, 5)
    assert rec.channel_names == ("ch0",)
    assert rec.duration == pytest.approx(0.05)


def test_recording_is_read_only():
    rec = Recording(samples=np.zeros((2, 4)), fs=10.0)
    with pytest.raises(ValueError):
        rec.samples[0, 0] = 1.0


def test_recording_rejects_bad_inputs():
    with pytest.raises(DomainError):
        Recording(samples=np.zeros((1, 4)), fs=0.0)
    with pytest.raises(StructuralError):
        Recording(samples=np.zeros((1, 4)), fs=10.0, labels=[0, 1])
    with pytest.raises(StructuralError):
        Recording(samples=np.zeros((2, 4)), fs=10.0, channel_names=("a",))
    with pytest.raises(DomainError):
        Recording(samples=np.zeros((1, 2)), fs=10.0, labels=[0, -1])


def test_save_then_load_keeps_samples_and_labels(tmp_path):
    rec = Recording(samples=np.array([[0.5, -1.25, 3.0], [2.0, 0.0, -7.5]]), fs=256.0,
                    channel_names=("C3", "C4"), labels=[2, 2, 3])
    path = tmp_path / "rec.csv"
    save_recording(rec, path, header=True)
    loaded = load_recording(path, fs=256.0, header=True, label_column=-1)
    np.testing.assert_array_equal(loaded.samples, rec.samples)
    np.testing.assert_array_equal(loaded.labels, rec.labels)
    assert loaded.channel_names == ("C3", "C4")


def test_load_ascii_matrix(tmp_path):
    path = tmp_path / "rec.asc"
    path.write_text("1.0 2.0 7\n3.0 4.0 7\n\n5.0 6.0 2\n")
    rec = load_recording(path, format=RecordingFormat.ASCII, fs=512.0, label_column=2)
    np.testing.assert_array_equal(rec.samples, [[1.0, 3.0, 5.0], [2.0, 4.0, 6.0]])
    np.testing.assert_array_equal(rec.labels, [7, 7, 2])


def test_load_reports_ragged_rows(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2\n3\n")
    with pytest.raises(StructuralError, match=":2:"):
        load_recording(path)


def test_load_reports_unparsable_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2\n3,abc\n")
    with pytest.raises(MalformedInputError) as err:
        load_recording(path)
    assert err.value.line == 2


def test_load_rejects_fractional_labels(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,0.5\n2,1\n")
    with pytest.raises(MalformedInputError):
        load_recording(path, label_column=-1)


def test_load_missing_file_is_os_error(tmp_path):
    with pytest.raises(OSError):
        load_recording(tmp_path / "absent.csv")


def test_design_bandpass_checks_edges():
    with pytest.raises(DomainError):
        design_bandpass(10.0, 5.0, 128.0)
    with pytest.raises(DomainError):
        design_bandpass(0.5, 70.0, 128.0)


def test_bandpass_keeps_alpha_and_removes_line_noise():
    fs = 512.0
    t = np.arange(int(4 * fs)) / fs
    inside = Recording(samples=np.sin(2 * np.pi * 10 * t), fs=fs)
    outside = Recording(samples=np.sin(2 * np.pi * 60 * t), fs=fs)
    middle = slice(512, -512)
    passed = bandpass(inside, 0.5, 45.0).samples[0, middle]
    stopped = bandpass(outside, 0.5, 45.0).samples[0, middle]
    assert np.sqrt(np.mean(passed ** 2)) == pytest.approx(np.sqrt(0.5), rel=0.02)
    assert np.sqrt(np.mean(stopped ** 2)) < 0.01


def test_downsample_takes_every_nth_sample():
    rec = Recording(samples=np.arange(16.0), fs=512.0, labels=np.repeat([0, 1], 8))
    out = downsample(rec, 128.0)
    assert out.fs == 128.0
    np.testing.assert_array_equal(out.samples[0], [0.0, 4.0, 8.0, 12.0])
    np.testing.assert_array_equal(out.labels, [0, 0, 1, 1])


def test_downsample_needs_integer_ratio():
    rec = Recording(samples=np.arange(16.0), fs=512.0)
    with pytest.raises(DomainError):
        downsample(rec, 100.0)


def test_segment_drops_tied_windows():
    trials = segment(_step_recording(), window_s=1.0, hop_s=0.5)
    assert [t.label for t in trials] == [0, 1]
    assert [t.origin for t in trials] == [("step", 0), ("step", 10)]
    assert all(t.window_len == 10 for t in trials)


def test_segment_short_recording_gives_nothing():
    assert segment(_step_recording(), window_s=3.0, hop_s=1.0) == []


def test_segment_preconditions():
    with pytest.raises(PreconditionError):
        segment(_step_recording(), window_s=1.0, hop_s=2.0)
    unlabeled = Recording(samples=np.arange(20.0), fs=10.0)
    with pytest.raises(PreconditionError):
        segment(unlabeled, window_s=1.0, hop_s=0.5)


def test_select_task_pair_relabels_in_task_order():
    trials = [Trial(np.zeros((1, 4)), label, 128.0) for label in (2, 3, 7, 2)]
    kept = select_task_pair(trials, (7, 2))
    assert [t.label for t in kept] == [1, 0, 1]


def test_task_pair_datasets_cover_every_pair():
    specs = task_pair_datasets({"s1": ["a.asc"], "s2": ["b.asc"]})
    assert [s.name for s in specs] == ["s1-2v3", "s1-2v7", "s1-3v7", "s2-2v3", "s2-2v7", "s2-3v7"]
    assert specs[0].paths == ("a.asc",)


def test_dataset_spec_validation():
    with pytest.raises(DomainError):
        DatasetSpec(name="x", subject="x", tasks=(1, 1), paths=("a",))
    with pytest.raises(DomainError):
        DatasetSpec(name="x", subject="x", tasks=(0, 1))


def test_dataset_trials_from_generator(two_tone_spec):
    spec = DatasetSpec(name="tone", subject="tone", tasks=(0, 1), synth=two_tone_spec, synth_seed=4)
    trials = dataset_trials(spec, PreprocessConfig(target_fs=128.0))
    labels = {t.label for t in trials}
    assert labels == {0, 1}
    assert all(t.samples.shape == (2, 128) for t in trials)
    assert all(t.origin[0] == "tone#synth4" for t in trials)
