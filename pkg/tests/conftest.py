import hypothesis
import numpy as np
import pytest

from bcibenchmark.config import config_from_mapping
from bcibenchmark.synthetic import synth_recording, synth_spec_from_mapping

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=5)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False)


# two channels at 128 Hz; class 0 carries 10 Hz on channel 0, class 1 carries 20 Hz
TWO_TONE = {
    "fs": 128,
    "channels": 2,
    "segment_seconds": 8,
    "segments_per_class": 2,
    "classes": [
        {"sources": [{"kind": "noise", "amplitude": 0.5},
                     {"kind": "sine", "freq": 10, "amplitude": 2.0, "channels": [0], "phase": "random"}]},
        {"sources": [{"kind": "noise", "amplitude": 0.5},
                     {"kind": "sine", "freq": 20, "amplitude": 2.0, "channels": [0], "phase": "random"}]},
    ],
}


@pytest.fixture
def two_tone_spec():
    return synth_spec_from_mapping(TWO_TONE)


@pytest.fixture
def two_tone_recording(two_tone_spec):
    return synth_recording(two_tone_spec, seed=3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def separable(rng):
    """Two Gaussian blobs in 2-D, far apart."""
    X0 = rng.normal(loc=(-3.0, -3.0), scale=0.5, size=(30, 2))
    X1 = rng.normal(loc=(3.0, 3.0), scale=0.5, size=(30, 2))
    X = np.vstack([X0, X1])
    y = np.r_[np.zeros(30, dtype=np.int64), np.ones(30, dtype=np.int64)]
    return X, y


def tiny_run_mapping(directory, kinds=("Bayes", "SVM")):
    """A run small enough for the full pipeline inside a unit test."""
    return {
        "seed": 0,
        "jobs": 1,
        "datasets": [
            {"name": "tone-a", "synth": dict(TWO_TONE), "seed": 1},
            {"name": "tone-b", "synth": dict(TWO_TONE), "seed": 2},
        ],
        "preprocessing": {"target_fs": 128},
        "features": {
            "max_triples": 0,
            "max_quadruples": 0,
            "ar_orders": [4],
            "dct_k": 8,
            "wavelet_families": ["haar"],
            "wavelet_levels": 2,
            "entropy_bins": 16,
            "entropy_q": [2.0],
        },
        "selection": {"shortlist": 6, "k_within": 2, "k_across": 3, "k_anfis": 2},
        "classifiers": {"kinds": list(kinds)},
        "output": {"directory": str(directory), "formats": ["csv", "json", "plotdata"]},
    }


@pytest.fixture
def run_mapping():
    return tiny_run_mapping


@pytest.fixture
def tiny_run(tmp_path):
    return config_from_mapping(tiny_run_mapping(tmp_path / "out"), environ={})
