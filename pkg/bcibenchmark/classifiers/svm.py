"""Soft-margin linear SVM solved in the dual by libsvm; only (w, b) are kept."""
import numpy as np
from sklearn.svm import SVC


def fit(X, y, hp, seed):
    clf = SVC(kernel="linear", C=hp["C"], tol=hp["tol"], max_iter=hp["max_iter"])
    clf.fit(X, y)
    w = clf.coef_[0].copy()
    b = float(clf.intercept_[0])
    # dual objective sum(alpha) - 1/2 |w|^2 at the solution
    alpha = np.abs(clf.dual_coef_[0])
    dual = float(alpha.sum() - 0.5 * w @ w)
    return {"w": w, "b": np.array([b])}, [dual]


def decision(params, X, hp):
    return np.asarray(X, dtype=float) @ params["w"] + params["b"][0]
