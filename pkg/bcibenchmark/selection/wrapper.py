from __future__ import annotations

import logging
import threading
from enum import Enum

import numpy as np
from sklearn.model_selection import StratifiedKFold

from ..classifiers import ClassifierSpec, predict, train
from ..errors import BenchmarkError, PreconditionError, SelectionError

logger = logging.getLogger(__name__)


class Protocol(str, Enum):
    INNER_CV = "inner-cv"
    PAPER_FAITHFUL = "paper-faithful"


class WrapperCriterion:
    """Classifier accuracy (fraction) of a feature subset.

    ``inner-cv`` scores by stratified folds inside the training rows;
    ``paper-faithful`` trains on all training rows and scores on the held-out
    rows. Results are cached per sorted subset; the cache is shared by every
    search that uses this criterion and is safe to hit from several threads.
    """

    def __init__(self, spec: ClassifierSpec, X_train, y_train, protocol=Protocol.INNER_CV,
                 folds=3, seed=0, X_test=None, y_test=None):
        self.spec = spec
        self.protocol = Protocol(protocol)
        self.seed = seed
        self.X_train = np.asarray(X_train, dtype=float)
        self.y_train = np.asarray(y_train, dtype=np.int64)
        if self.protocol is Protocol.PAPER_FAITHFUL:
            if X_test is None or y_test is None:
                raise PreconditionError("the paper-faithful protocol scores on held-out rows; none were given")
            self.X_test = np.asarray(X_test, dtype=float)
            self.y_test = np.asarray(y_test, dtype=np.int64)
            self._splits = None
        else:
            smallest = int(np.bincount(self.y_train, minlength=2).min())
            n_splits = max(2, min(folds, smallest))
            if smallest < 2:
                raise PreconditionError("inner cross-validation needs at least 2 training rows per class")
            cv = StratifiedKFold(n_splits=n_splits, shuffle=True, random_state=seed)
            self._splits = list(cv.split(self.X_train, self.y_train))
        self._cache = {}
        self._lock = threading.Lock()

    @property
    def evaluations(self):
        return len(self._cache)

    def __call__(self, subset):
        key = tuple(sorted(int(i) for i in subset))
        if not key:
            raise PreconditionError("cannot score an empty feature subset")
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = self._evaluate(key)
        with self._lock:
            return self._cache.setdefault(key, value)

    def _evaluate(self, key):
        columns = list(key)
        try:
            if self.protocol is Protocol.PAPER_FAITHFUL:
                model = train(self.spec, self.X_train[:, columns], self.y_train, seed=self.seed)
                return float(np.mean(predict(model, self.X_test[:, columns]) == self.y_test))
            correct = 0
            for fit_rows, val_rows in self._splits:
                model = train(self.spec, self.X_train[np.ix_(fit_rows, columns)], self.y_train[fit_rows],
                              seed=self.seed)
                correct += int(np.sum(predict(model, self.X_train[np.ix_(val_rows, columns)])
                                      == self.y_train[val_rows]))
            return correct / self.y_train.shape[0]
        except (BenchmarkError, ValueError, ArithmeticError, np.linalg.LinAlgError) as err:
            raise SelectionError(f"{self.spec.kind.value} failed to train: {err}", subset=key) from err
