import numpy as np
import pytest

from bcibenchmark.errors import StructuralError
from bcibenchmark.features import (
    FeatureConfig,
    FeatureDescriptor,
    FeatureGroup,
    FeatureMatrix,
    apply_normalization,
    build_feature_matrix,
    normalize,
)
from bcibenchmark.features.autoregressive import ARConfig
from bcibenchmark.signals import Trial

SMALL = FeatureConfig(groups=("energy", "AR"), ar=ARConfig(orders=(4,)))


def _trials(rng, n=6, channels=2, length=128):
    return [Trial(samples=rng.standard_normal((channels, length)), label=i % 2, fs=128.0, origin=("r", 64 * i))
            for i in range(n)]


def test_groups_are_parsed_and_ordered():
    assert SMALL.groups == (FeatureGroup.AR, FeatureGroup.ENERGY)


def test_columns_sorted_and_unique(rng):
    matrix = build_feature_matrix(_trials(rng), cfg=SMALL)
    keys = [d.sort_key for d in matrix.descriptors]
    assert keys == sorted(keys)
    assert len(set(matrix.descriptors)) == matrix.n_features == 2 * 4 + 2 * 26
    assert matrix.descriptors[0].group is FeatureGroup.AR
    np.testing.assert_array_equal(matrix.labels, [0, 1, 0, 1, 0, 1])


def test_worker_count_does_not_change_values(rng):
    trials = _trials(rng)
    serial = build_feature_matrix(trials, cfg=SMALL, jobs=1)
    parallel = build_feature_matrix(trials, cfg=SMALL, jobs=2)
    np.testing.assert_array_equal(serial.values, parallel.values)
    assert serial.descriptors == parallel.descriptors


def test_structural_checks(rng):
    with pytest.raises(StructuralError):
        build_feature_matrix([], cfg=SMALL)
    trials = _trials(rng, n=2)
    trials.append(Trial(samples=np.zeros((2, 64)), label=0, fs=128.0))
    with pytest.raises(StructuralError):
        build_feature_matrix(trials, cfg=SMALL)
    with pytest.raises(StructuralError):
        FeatureMatrix(values=np.zeros((2, 3)), descriptors=(), labels=[0, 1])


def test_group_columns_and_slicing(rng):
    matrix = build_feature_matrix(_trials(rng), cfg=SMALL)
    ar = matrix.group_columns("AR")
    assert ar.tolist() == list(range(8))
    sub = matrix.take_columns(ar).take_rows([0, 2])
    assert sub.values.shape == (2, 8)
    assert sub.groups() == [FeatureGroup.AR]


def test_normalize_uses_training_statistics(rng):
    descriptors = [FeatureDescriptor("Statistic", "variance", (i,)) for i in range(3)]
    values = np.c_[rng.normal(5.0, 2.0, 40), rng.normal(-1.0, 0.1, 40), np.full(40, 7.0)]
    matrix = FeatureMatrix(values=values, descriptors=descriptors, labels=np.arange(40) % 2)
    train = normalize(matrix.take_rows(np.arange(30)))
    np.testing.assert_allclose(train.values[:, :2].mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(train.values[:, :2].std(axis=0), 1.0)
    assert np.all(train.values[:, 2] == 0.0)

    test = apply_normalization(matrix.take_rows(np.arange(30, 40)), train.stats)
    expected = (values[30:, :2] - train.mean[:2]) / train.std[:2]
    np.testing.assert_allclose(test.values[:, :2], expected)
    assert np.all(test.values[:, 2] == 0.0)
    assert test.normalization == "zscore"


def test_statistics_must_match_columns(rng):
    descriptors = [FeatureDescriptor("Energy", "band_energy", (0,), (("band", (1.0, 2.0)),))]
    matrix = FeatureMatrix(values=rng.standard_normal((4, 1)), descriptors=descriptors, labels=[0, 1, 0, 1])
    stats = normalize(matrix).stats
    wider = FeatureMatrix(values=np.zeros((2, 2)), descriptors=descriptors * 2, labels=[0, 1])
    with pytest.raises(StructuralError):
        apply_normalization(wider, stats)


def test_descriptor_identity():
    d = FeatureDescriptor("energy", "band_energy", [1], [("band", [8, 13])])
    assert d.group is FeatureGroup.ENERGY
    assert d.param("band") == (8, 13)
    assert FeatureDescriptor.from_dict(d.to_dict()) == d
    assert d.label == "Energy/band_energy[1](band=(8, 13))"
    with pytest.raises(StructuralError):
        FeatureDescriptor("AR", "ar_coef", ())
    with pytest.raises(ValueError):
        FeatureGroup.parse("spectral")
