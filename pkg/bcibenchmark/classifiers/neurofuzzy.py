"""Fuzzy C-means memberships appended to the inputs of a tanh MLP."""
import numpy as np
import skfuzzy as fuzz

from . import mlp

MLP_PREFIX = "mlp."


def cluster_memberships(X, centers, fuzzifier, seed):
    """[n, c] membership degrees of ``X`` in the trained clusters; rows sum to 1."""
    u, *_ = fuzz.cluster.cmeans_predict(np.asarray(X, dtype=float).T, centers, fuzzifier,
                                        error=1e-6, maxiter=300, seed=seed)
    return u.T


def fit(X, y, hp, seed):
    X = np.asarray(X, dtype=float)
    c = min(hp["clusters"], X.shape[0])
    centers, *_ = fuzz.cluster.cmeans(X.T, c, hp["fuzzifier"], error=1e-6, maxiter=300, seed=seed)
    augmented = np.hstack([X, cluster_memberships(X, centers, hp["fuzzifier"], 0)])
    net, trace = mlp.fit_network(augmented, y, 1, hp["hidden"], "tanh", hp["epochs"],
                                 hp["learning_rate"], hp["momentum"], seed, kind="NFCM")
    params = {"centers": centers}
    params.update({MLP_PREFIX + name: value for name, value in net.items()})
    return params, trace


def decision(params, X, hp):
    X = np.asarray(X, dtype=float)
    u = cluster_memberships(X, params["centers"], hp["fuzzifier"], 0)
    net = {name[len(MLP_PREFIX):]: value for name, value in params.items() if name.startswith(MLP_PREFIX)}
    logits, _ = mlp.forward(net, np.hstack([X, u]), "tanh")
    return logits
