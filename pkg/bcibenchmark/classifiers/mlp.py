"""Fully connected nets with a sigmoid output, trained by full-batch momentum descent.

Hidden activation is tanh ("TG") or identity ("PN"); the loss is the mean
binary cross-entropy written on the output logit.
"""
from __future__ import annotations

import numpy as np
from scipy.special import expit

from ..errors import TrainingError

ACTIVATIONS = ("tanh", "identity")


def init_params(sizes, seed):
    rng = np.random.default_rng(seed)
    params = {}
    for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        params[f"W{i}"] = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        params[f"b{i}"] = np.zeros(fan_out)
    return params


def _n_layers(params):
    return sum(1 for name in params if name.startswith("W"))


def forward(params, X, activation):
    """Output logits and the list of layer inputs (kept for backprop)."""
    a = np.asarray(X, dtype=float)
    inputs = []
    n_layers = _n_layers(params)
    for i in range(n_layers - 1):
        inputs.append(a)
        z = a @ params[f"W{i}"] + params[f"b{i}"]
        a = np.tanh(z) if activation == "tanh" else z
    inputs.append(a)
    last = n_layers - 1
    logits = (a @ params[f"W{last}"] + params[f"b{last}"])[:, 0]
    return logits, inputs


def loss(params, X, y, activation):
    logits, _ = forward(params, X, activation)
    return float(np.mean(np.logaddexp(0.0, logits) - y * logits))


def gradients(params, X, y, activation):
    logits, inputs = forward(params, X, activation)
    n = logits.shape[0]
    delta = ((expit(logits) - y) / n)[:, np.newaxis]
    grads = {}
    for i in reversed(range(_n_layers(params))):
        a = inputs[i]
        grads[f"W{i}"] = a.T @ delta
        grads[f"b{i}"] = delta.sum(axis=0)
        if i:
            delta = delta @ params[f"W{i}"].T
            if activation == "tanh":
                delta = delta * (1.0 - a ** 2)
    return grads


def fit_network(X, y, hidden_layers, width, activation, epochs, learning_rate, momentum, seed, kind="MLP"):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    sizes = [X.shape[1]] + [width] * hidden_layers + [1]
    params = init_params(sizes, seed)
    velocity = {name: np.zeros_like(value) for name, value in params.items()}
    trace = []
    for epoch in range(epochs):
        grads = gradients(params, X, y, activation)
        for name in params:
            velocity[name] = momentum * velocity[name] - learning_rate * grads[name]
            params[name] = params[name] + velocity[name]
        value = loss(params, X, y, activation)
        if not np.isfinite(value):
            raise TrainingError(f"loss became non-finite at epoch {epoch}", kind=kind)
        trace.append(value)
    return params, trace


def fit(X, y, hp, seed):
    return fit_network(X, y, hp["hidden_layers"], hp["hidden"], hp["activation"], hp["epochs"],
                       hp["learning_rate"], hp["momentum"], seed, kind=hp.get("kind", "MLP"))


def decision(params, X, hp):
    logits, _ = forward(params, X, hp["activation"])
    return logits


#------------------------------------------------------------------------------
# Analytic vs central-difference gradient
#------------------------------------------------------------------------------
def gradient_check(X, y, hidden_layers, width, activation, seed=0, h=1e-5):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    params = init_params([X.shape[1]] + [width] * hidden_layers + [1], seed)
    analytic = gradients(params, X, y, activation)
    a, numeric = [], []
    for name, value in params.items():
        for idx in np.ndindex(value.shape):
            saved = value[idx]
            value[idx] = saved + h
            up = loss(params, X, y, activation)
            value[idx] = saved - h
            down = loss(params, X, y, activation)
            value[idx] = saved
            a.append(analytic[name][idx])
            numeric.append((up - down) / (2 * h))
    a, numeric = np.asarray(a), np.asarray(numeric)
    scale = np.linalg.norm(a) + np.linalg.norm(numeric)
    return float(np.linalg.norm(a - numeric) / scale) if scale > 0 else 0.0


def n_params(n_inputs, hidden_layers, width):
    sizes = [n_inputs] + [width] * hidden_layers + [1]
    return sum(i * o + o for i, o in zip(sizes[:-1], sizes[1:]))
