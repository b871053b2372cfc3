import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bcibenchmark.errors import DomainError, PreconditionError
from bcibenchmark.features import FeatureDescriptor, FeatureMatrix
from bcibenchmark.selection import (
    bhattacharyya_1d,
    mahalanobis_1d,
    rank_independent,
    scatter_1d,
    separability_scores,
    shortlist,
)
from bcibenchmark.selection.separability import SENTINEL, preceding_max_correlation


def _matrix(values, labels):
    descriptors = [FeatureDescriptor("Statistic", "variance", (i,)) for i in range(values.shape[1])]
    return FeatureMatrix(values=values, descriptors=descriptors, labels=labels)


def test_worked_example():
    col = [-1.0, 1.0, 1.0, 3.0]
    y = [0, 0, 1, 1]
    assert mahalanobis_1d(col, y) == pytest.approx(4.0)
    assert bhattacharyya_1d(col, y) == pytest.approx(0.5)
    assert scatter_1d(col, y) == pytest.approx(1.0)


def test_zero_variance_is_capped():
    col = [0.0, 0.0, 1.0, 1.0]
    y = [0, 0, 1, 1]
    assert mahalanobis_1d(col, y) == SENTINEL
    assert scatter_1d(col, y) == SENTINEL
    assert mahalanobis_1d([2.0, 2.0, 2.0, 2.0], y) == 0.0


def test_needs_two_classes_with_two_samples():
    with pytest.raises(DomainError):
        mahalanobis_1d([1.0, 2.0, 3.0], [0, 0, 0])
    with pytest.raises(DomainError):
        mahalanobis_1d([1.0, 2.0, 3.0], [0, 0, 1])


@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_scores_do_not_depend_on_label_names(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((20, 3))
    y = np.r_[np.zeros(10, dtype=int), np.ones(10, dtype=int)]
    scores = separability_scores(X, y)
    assert np.all(scores >= -1e-12)
    np.testing.assert_allclose(separability_scores(X, 1 - y), scores)


def test_preceding_correlation():
    a = np.array([1.0, 2.0, 3.0, 4.0])
    X = np.c_[a, -2 * a, np.array([1.0, -1.0, -1.0, 1.0])]
    out = preceding_max_correlation(X)
    assert out[0] == 0.0
    assert out[1] == pytest.approx(1.0)
    assert out[2] == pytest.approx(0.0, abs=1e-12)


def test_redundant_copy_is_demoted(rng):
    y = np.r_[np.zeros(40, dtype=int), np.ones(40, dtype=int)]
    strong = y + 0.2 * rng.standard_normal(80)
    medium = 0.5 * y + 0.4 * rng.standard_normal(80)
    noise = rng.standard_normal(80)
    ranked = rank_independent(_matrix(np.c_[strong, strong, noise, medium], y))
    assert ranked.order.tolist() == [0, 3, 1, 2]
    assert ranked.score_of(1) == pytest.approx(0.0, abs=1e-9)
    assert ranked.combined[1] == pytest.approx(ranked.combined[0])
    assert shortlist(ranked, 2) == [0, 3]


def test_rank_subset_of_columns(rng):
    y = np.r_[np.zeros(10, dtype=int), np.ones(10, dtype=int)]
    matrix = _matrix(rng.standard_normal((20, 5)), y)
    ranked = rank_independent(matrix, columns=[4, 1])
    assert sorted(ranked.order.tolist()) == [1, 4]
    assert ranked.columns.tolist() == [1, 4]
    with pytest.raises(PreconditionError):
        rank_independent(matrix, columns=[])
    with pytest.raises(PreconditionError):
        shortlist(ranked, 0)


@pytest.mark.parametrize("a, b", [(3.0, 5.0), (-2.0, 1.0), (1e-4, 7.0), (1e4, -3.0)])
def test_scores_and_ranking_survive_affine_rescaling(rng, a, b):
    y = np.r_[np.zeros(40, dtype=int), np.ones(40, dtype=int)]
    X = rng.standard_normal((80, 6)) * rng.uniform(0.5, 2.0, 6) + np.outer(y, rng.uniform(0.0, 1.5, 6))
    X[:, 5] = X[:, 0] + 0.3 * rng.standard_normal(80)
    moved = a * X + b
    np.testing.assert_allclose(separability_scores(moved, y), separability_scores(X, y), rtol=1e-9, atol=1e-9)
    shifts = rng.uniform(-10.0, 10.0, 6)
    columnwise = X * (a * np.linspace(1.0, 3.0, 6)) + shifts
    assert rank_independent(_matrix(columnwise, y)).order.tolist() == rank_independent(_matrix(X, y)).order.tolist()


def test_bhattacharyya_with_a_flat_class_ignores_scale():
    y = [0, 0, 0, 1, 1, 1]
    col = np.array([1.0, 1.0, 1.0, 0.0, 2.0, 4.0])
    reference = bhattacharyya_1d(col, y)
    assert 0.0 < reference < SENTINEL
    for scale, shift in ((1e-8, 0.0), (1e-3, 2.0), (1e6, 2.0)):
        assert bhattacharyya_1d(scale * col + shift, y) == pytest.approx(reference, rel=1e-9)
    assert bhattacharyya_1d([0.0, 0.0, 0.0, 1.0, 1.0, 1.0], y) == SENTINEL
    assert bhattacharyya_1d([2.0] * 6, y) == 0.0
