"""The twelve classifiers behind one train / predict contract.

Every backend module exposes ``fit(X, y, hp, seed) -> (params, trace)`` and
``decision(params, X, hp) -> scores``; a score >= 0 means class 1, so an
exact boundary score predicts class 1.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .. import Utils
from ..errors import DomainError, PreconditionError, StructuralError, TrainingError
from . import anfis, bayes, mlp, neurofuzzy, perceptron, rbf, svm

logger = logging.getLogger(__name__)

MODEL_FORMAT = "bcibench-model"
MODEL_VERSION = 1


class ClassifierKind(str, Enum):
    BAYES = "Bayes"
    SVM = "SVM"
    PERCEP = "Percep"
    MLP2TG = "MLP2TG"
    MLP2PN = "MLP2PN"
    MLP3TG = "MLP3TG"
    MLP3PN = "MLP3PN"
    RBF = "RBF"
    ANFIS1 = "ANFIS1"
    ANFIS2 = "ANFIS2"
    ANFIS3 = "ANFIS3"
    NFCM = "NFCM"

    @property
    def is_anfis(self):
        return self in (ClassifierKind.ANFIS1, ClassifierKind.ANFIS2, ClassifierKind.ANFIS3)

    @property
    def is_mlp(self):
        return self.value.startswith("MLP")

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).replace("-", "").lower()
        for kind in cls:
            if kind.value.lower() == key or kind.name.lower() == key:
                return kind
        raise ValueError(f"unknown classifier {value!r}")


_MLP_DEFAULTS = {"hidden": 10, "epochs": 500, "learning_rate": 0.01, "momentum": 0.9}
_ANFIS_DEFAULTS = {"epochs": 50, "learning_rate": 0.01, "max_inputs": 8}

# "Two layer" nets have one hidden layer, "three layer" nets two
DEFAULT_HYPERPARAMS = {
    ClassifierKind.BAYES: {"ridge": 1e-3},
    ClassifierKind.SVM: {"C": 1.0, "tol": 1e-5, "max_iter": -1},
    ClassifierKind.PERCEP: {"epochs": 200, "learning_rate": 1.0},
    ClassifierKind.MLP2TG: dict(_MLP_DEFAULTS, hidden_layers=1, activation="tanh"),
    ClassifierKind.MLP2PN: dict(_MLP_DEFAULTS, hidden_layers=1, activation="identity"),
    ClassifierKind.MLP3TG: dict(_MLP_DEFAULTS, hidden_layers=2, activation="tanh"),
    ClassifierKind.MLP3PN: dict(_MLP_DEFAULTS, hidden_layers=2, activation="identity"),
    ClassifierKind.RBF: {"centers": 10},
    ClassifierKind.ANFIS1: dict(_ANFIS_DEFAULTS, membership="gaussian"),
    ClassifierKind.ANFIS2: dict(_ANFIS_DEFAULTS, membership="psig"),
    ClassifierKind.ANFIS3: dict(_ANFIS_DEFAULTS, membership="trapezoid"),
    ClassifierKind.NFCM: dict(_MLP_DEFAULTS, clusters=4, fuzzifier=2.0),
}

_BACKENDS = {
    ClassifierKind.BAYES: bayes,
    ClassifierKind.SVM: svm,
    ClassifierKind.PERCEP: perceptron,
    ClassifierKind.MLP2TG: mlp,
    ClassifierKind.MLP2PN: mlp,
    ClassifierKind.MLP3TG: mlp,
    ClassifierKind.MLP3PN: mlp,
    ClassifierKind.RBF: rbf,
    ClassifierKind.ANFIS1: anfis,
    ClassifierKind.ANFIS2: anfis,
    ClassifierKind.ANFIS3: anfis,
    ClassifierKind.NFCM: neurofuzzy,
}

# keys fixed by the kind itself; overriding them would make it a different row of the table
_STRUCTURAL = {"hidden_layers", "activation", "membership"}


def _check_hyperparams(kind, hp):
    problems = []
    for key, value in hp.items():
        if key in ("activation", "membership"):
            continue
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            problems.append(f"{key}={value!r} is not a number")
        elif key in ("epochs", "hidden", "hidden_layers", "centers", "clusters", "max_inputs") and \
                (int(value) != value or value < 1):
            problems.append(f"{key} must be a positive integer")
        elif key in ("C", "learning_rate", "tol") and value <= 0:
            problems.append(f"{key} must be positive")
        elif key in ("ridge", "momentum") and value < 0:
            problems.append(f"{key} must be non-negative")
        elif key == "fuzzifier" and value <= 1:
            problems.append("fuzzifier must exceed 1")
    if problems:
        raise DomainError(f"{kind.value}: " + "; ".join(problems))


@dataclass(frozen=True)
class ClassifierSpec:
    kind: ClassifierKind
    hyperparams: dict = field(default_factory=dict)

    def __post_init__(self):
        kind = ClassifierKind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        unknown = set(self.hyperparams) - set(DEFAULT_HYPERPARAMS[kind])
        if unknown:
            raise DomainError(f"{kind.value}: unknown hyperparameters {sorted(unknown)}")
        fixed = _STRUCTURAL & set(self.hyperparams)
        if fixed:
            raise DomainError(f"{kind.value}: {sorted(fixed)} follow from the classifier kind")
        _check_hyperparams(kind, self.resolved())

    def resolved(self):
        hp = dict(DEFAULT_HYPERPARAMS[self.kind])
        hp.update(self.hyperparams)
        return hp

    def to_dict(self):
        return {"kind": self.kind.value, "hyperparams": dict(sorted(self.hyperparams.items()))}


@dataclass(frozen=True)
class TrainMeta:
    n_features: int
    priors: tuple
    trace: tuple = ()
    seed: int = 0


@dataclass(frozen=True, eq=False)
class TrainedModel:
    spec: ClassifierSpec
    params: dict
    meta: TrainMeta

    @property
    def n_features(self):
        return self.meta.n_features


def _as_training_data(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).reshape(-1)
    if X.ndim != 2:
        raise StructuralError(f"training inputs must be 2-D, got shape {X.shape}")
    if X.shape[0] != y.shape[0]:
        raise StructuralError(f"{X.shape[0]} rows but {y.shape[0]} labels")
    if X.shape[1] < 1:
        raise PreconditionError("training needs at least one feature")
    if not np.all(np.isfinite(X)):
        raise DomainError("training inputs contain NaN or Inf")
    if not set(np.unique(y)) <= {0, 1}:
        raise DomainError(f"labels must be 0/1, got {sorted(set(np.unique(y).tolist()))}")
    if len(np.unique(y)) < 2:
        raise DomainError("training set holds a single class")
    return X, y.astype(np.int64)


def train(spec: ClassifierSpec, X, y, seed=0) -> TrainedModel:
    X, y = _as_training_data(X, y)
    hp = spec.resolved()
    hp["kind"] = spec.kind.value
    params, trace = _BACKENDS[spec.kind].fit(X, y, hp, seed)
    if not all(np.all(np.isfinite(v)) for v in params.values()):
        raise TrainingError("training produced non-finite parameters", kind=spec.kind.value)
    if not np.all(np.isfinite(trace)):
        raise TrainingError("training trace is not finite", kind=spec.kind.value)
    priors = (float(np.mean(y == 0)), float(np.mean(y == 1)))
    meta = TrainMeta(n_features=X.shape[1], priors=priors, trace=tuple(float(t) for t in trace), seed=int(seed))
    return TrainedModel(spec=spec, params={k: np.asarray(v, dtype=float) for k, v in params.items()}, meta=meta)


def decision_values(model: TrainedModel, X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.n_features:
        raise StructuralError(f"model expects {model.n_features} features, got {X.shape[1]}")
    hp = model.spec.resolved()
    return np.asarray(_BACKENDS[model.spec.kind].decision(model.params, X, hp), dtype=float)


def predict(model: TrainedModel, X):
    return (decision_values(model, X) >= 0).astype(np.int64)


#------------------------------------------------------------------------------
# Persistence
#------------------------------------------------------------------------------
def model_to_json(model: TrainedModel) -> str:
    data = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "spec": model.spec.to_dict(),
        "hyperparams": model.spec.resolved(),
        "params": {name: {"shape": list(value.shape), "data": value.reshape(-1).tolist()}
                   for name, value in sorted(model.params.items())},
        "meta": {
            "n_features": model.meta.n_features,
            "priors": list(model.meta.priors),
            "trace": list(model.meta.trace),
            "seed": model.meta.seed,
        },
    }
    return json.dumps(Utils.to_plain(data), sort_keys=True, indent=1)


def model_from_json(text) -> TrainedModel:
    data = json.loads(text)
    if data.get("format") != MODEL_FORMAT or data.get("version") != MODEL_VERSION:
        raise StructuralError(f"not a version-{MODEL_VERSION} model file")
    spec = ClassifierSpec(data["spec"]["kind"], dict(data["spec"]["hyperparams"]))
    params = {name: np.array(entry["data"], dtype=float).reshape(entry["shape"])
              for name, entry in data["params"].items()}
    meta = data["meta"]
    return TrainedModel(spec=spec, params=params, meta=TrainMeta(
        n_features=int(meta["n_features"]),
        priors=tuple(meta["priors"]),
        trace=tuple(meta["trace"]),
        seed=int(meta["seed"]),
    ))


#------------------------------------------------------------------------------
# Gradient check entry point (nets and ANFIS premise layer)
#------------------------------------------------------------------------------
MAX_CHECK_PARAMS = 50


def mlp_gradient_check(spec: ClassifierSpec, X, y, seed=0):
    X, y = _as_training_data(X, y)
    hp = spec.resolved()
    if spec.kind.is_mlp:
        count = mlp.n_params(X.shape[1], hp["hidden_layers"], hp["hidden"])
        if count > MAX_CHECK_PARAMS:
            raise PreconditionError(f"gradient check is meant for small nets; this one has {count} parameters")
        return mlp.gradient_check(X, y, hp["hidden_layers"], hp["hidden"], hp["activation"], seed=seed)
    if spec.kind.is_anfis:
        count = X.shape[1] * anfis.MF_PER_INPUT * (2 if hp["membership"] == "gaussian" else 4)
        if count > MAX_CHECK_PARAMS:
            raise PreconditionError(f"gradient check is meant for small nets; this one has {count} parameters")
        return anfis.gradient_check(X, y, hp["membership"])
    raise DomainError(f"{spec.kind.value} is not trained by gradient descent")
