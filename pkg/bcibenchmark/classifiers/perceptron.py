"""Single-layer perceptron: online rule over shuffled epochs, best epoch kept (pocket)."""
import numpy as np
from sklearn.linear_model import Perceptron


def fit(X, y, hp, seed):
    X = np.asarray(X, dtype=float)
    rng = np.random.default_rng(seed)
    clf = Perceptron(eta0=hp["learning_rate"], fit_intercept=True, shuffle=False)
    best_acc, best_w, best_b = -1.0, np.zeros(X.shape[1]), 0.0
    trace = []
    for epoch in range(hp["epochs"]):
        order = rng.permutation(X.shape[0])
        if epoch == 0:
            clf.partial_fit(X[order], y[order], classes=np.array([0, 1]))
        else:
            clf.partial_fit(X[order], y[order])
        w, b = clf.coef_[0], float(clf.intercept_[0])
        acc = float(np.mean((X @ w + b >= 0).astype(int) == y))
        trace.append(acc)
        if acc > best_acc:
            best_acc, best_w, best_b = acc, w.copy(), b
        if acc == 1.0:
            break
    return {"w": best_w, "b": np.array([best_b])}, trace


def decision(params, X, hp):
    return np.asarray(X, dtype=float) @ params["w"] + params["b"][0]
