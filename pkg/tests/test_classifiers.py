import numpy as np
import pytest
from scipy.stats import norm

from bcibenchmark.classifiers import (
    ClassifierKind,
    ClassifierSpec,
    TrainedModel,
    TrainMeta,
    decision_values,
    mlp_gradient_check,
    model_from_json,
    model_to_json,
    predict,
    train,
)
from bcibenchmark.classifiers import anfis, bayes, rbf
from bcibenchmark.errors import DomainError, PreconditionError, StructuralError


@pytest.mark.parametrize("kind", list(ClassifierKind), ids=lambda k: k.value)
def test_every_kind_separates_two_blobs(kind, separable, rng):
    X, y = separable
    model = train(ClassifierSpec(kind), X, y, seed=0)
    X_new = np.vstack([rng.normal((-3.0, -3.0), 0.5, (10, 2)), rng.normal((3.0, 3.0), 0.5, (10, 2))])
    y_new = np.repeat([0, 1], 10)
    assert np.mean(predict(model, X_new) == y_new) >= 0.95
    assert model.n_features == 2
    assert model.meta.priors == (0.5, 0.5)


@pytest.mark.parametrize("kind", ["MLP3TG", "RBF", "NFCM", "ANFIS2"])
def test_same_seed_same_model(kind, separable):
    X, y = separable
    a = train(ClassifierSpec(kind), X, y, seed=3)
    b = train(ClassifierSpec(kind), X, y, seed=3)
    np.testing.assert_array_equal(decision_values(a, X), decision_values(b, X))
    assert a.meta.trace == b.meta.trace


@pytest.mark.parametrize("kind", ["Bayes", "MLP2PN", "ANFIS3"])
def test_saved_model_predicts_the_same(kind, separable):
    X, y = separable
    model = train(ClassifierSpec(kind, {"epochs": 5} if kind != "Bayes" else {}), X, y, seed=1)
    restored = model_from_json(model_to_json(model))
    np.testing.assert_allclose(decision_values(restored, X), decision_values(model, X))
    assert restored.spec == model.spec


def test_model_file_format_is_checked():
    with pytest.raises(StructuralError):
        model_from_json('{"format": "something-else", "version": 1}')


def test_hard_margin_svm_on_four_points():
    X = np.array([[-2.0, 0.0], [-1.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    y = np.array([0, 0, 1, 1])
    model = train(ClassifierSpec("SVM", {"C": 1e6}), X, y)
    np.testing.assert_allclose(model.params["w"], [1.0, 0.0], atol=1e-3)
    assert model.params["b"][0] == pytest.approx(0.0, abs=1e-3)
    # margin 1 / |w| is half the gap between the closest points
    assert 1.0 / np.linalg.norm(model.params["w"]) == pytest.approx(1.0, abs=1e-3)


def test_boundary_score_predicts_class_one():
    spec = ClassifierSpec("SVM")
    model = TrainedModel(spec=spec, params={"w": np.array([1.0]), "b": np.array([0.0])},
                         meta=TrainMeta(n_features=1, priors=(0.5, 0.5)))
    assert predict(model, [[0.0], [-1e-9], [1e-9]]).tolist() == [1, 0, 1]


def test_bayes_posteriors_follow_class_means(separable):
    X, y = separable
    params, trace = bayes.fit(X, y, {"ridge": 1e-3}, 0)
    assert trace == []
    lp = bayes.log_posteriors(params, [[-3.0, -3.0], [3.0, 3.0]])
    assert lp[0, 0] > lp[0, 1]
    assert lp[1, 1] > lp[1, 0]
    np.testing.assert_allclose(np.exp(params["log_prior"]), [0.5, 0.5])


def test_perceptron_keeps_its_best_epoch(separable):
    X, y = separable
    model = train(ClassifierSpec("Percep", {"epochs": 20}), X, y)
    best = max(model.meta.trace)
    assert np.mean(predict(model, X) == y) == pytest.approx(best)


def test_kmeans_objective_never_increases(separable):
    X, _ = separable
    _, trace = rbf.kmeans(X, 4, seed=0)
    assert all(b <= a + 1e-9 for a, b in zip(trace, trace[1:]))


def test_anfis_rules_and_input_cap(separable):
    X, y = separable
    assert anfis.rule_table(3).shape == (8, 3)
    wide = np.hstack([X] * 5)
    with pytest.raises(DomainError):
        train(ClassifierSpec("ANFIS1", {"max_inputs": 8}), wide, y)


def test_anfis_normalized_strengths_sum_to_one(separable):
    X, _ = separable
    premise = anfis.initial_premise(X, "gaussian")
    _, _, wbar, _ = anfis.firing_strengths(X, premise, "gaussian")
    np.testing.assert_allclose(wbar.sum(axis=1), 1.0)


@pytest.mark.parametrize("kind,hp", [
    ("MLP2TG", {"hidden": 3}),
    ("MLP3TG", {"hidden": 3}),
    ("MLP3PN", {"hidden": 3}),
    ("ANFIS1", {}),
    ("ANFIS2", {}),
])
def test_analytic_gradients_match_finite_differences(kind, hp, rng):
    X = rng.standard_normal((20, 2))
    y = (X[:, 0] + 0.3 * rng.standard_normal(20) > 0).astype(int)
    y[:2] = [0, 1]
    assert mlp_gradient_check(ClassifierSpec(kind, hp), X, y, seed=2) < 1e-5


def test_gradient_check_scope(separable):
    X, y = separable
    with pytest.raises(DomainError):
        mlp_gradient_check(ClassifierSpec("SVM"), X, y)
    with pytest.raises(PreconditionError):
        mlp_gradient_check(ClassifierSpec("MLP2TG"), np.hstack([X, X, X[:, :1]]), y)


def test_training_data_checks(separable):
    X, y = separable
    spec = ClassifierSpec("Bayes")
    with pytest.raises(DomainError):
        train(spec, X, np.zeros_like(y))
    with pytest.raises(DomainError):
        train(spec, X, y + 1)
    bad = X.copy()
    bad[0, 0] = np.nan
    with pytest.raises(DomainError):
        train(spec, bad, y)
    with pytest.raises(StructuralError):
        train(spec, X[:-1], y)
    model = train(spec, X, y)
    with pytest.raises(StructuralError):
        predict(model, np.zeros((2, 3)))


def test_spec_checks():
    assert ClassifierSpec("mlp-2tg").kind is ClassifierKind.MLP2TG
    assert ClassifierSpec("MLP3PN").resolved()["hidden_layers"] == 2
    with pytest.raises(DomainError):
        ClassifierSpec("SVM", {"epochs": 3})
    with pytest.raises(DomainError):
        ClassifierSpec("MLP2TG", {"activation": "relu"})
    with pytest.raises(DomainError):
        ClassifierSpec("MLP2TG", {"epochs": 0})
    with pytest.raises(DomainError):
        ClassifierSpec("NFCM", {"fuzzifier": 1.0})
    with pytest.raises(ValueError):
        ClassifierSpec("KNN")


def test_bayes_reaches_the_bayes_rate_on_unit_gaussians():
    accuracies = []
    for seed in range(10):
        rng = np.random.default_rng(seed)
        X = np.vstack([rng.normal((-1.0, 0.0), 1.0, (2000, 2)), rng.normal((1.0, 0.0), 1.0, (2000, 2))])
        y = np.repeat([0, 1], 2000)
        order = rng.permutation(4000)
        train_rows, test_rows = order[:2667], order[2667:]
        model = train(ClassifierSpec("Bayes"), X[train_rows], y[train_rows], seed=seed)
        accuracy = np.mean(predict(model, X[test_rows]) == y[test_rows])
        oracle = np.mean((X[test_rows, 0] > 0) == y[test_rows])
        assert abs(accuracy - oracle) <= 0.02
        accuracies.append(accuracy)
    assert np.mean(accuracies) == pytest.approx(norm.cdf(1.0), abs=0.02)
