"""First-order Sugeno ANFIS on a grid partition, two membership functions per input.

Hybrid learning per epoch: consequents by least squares with the premise
fixed, then one gradient step on the premise parameters for 1/2 MSE with the
consequents fixed. Class 1 is predicted when the output reaches 0.5.
"""
from __future__ import annotations

import itertools

import numpy as np
import skfuzzy as fuzz

from ..errors import DomainError, TrainingError

MF_FAMILIES = ("gaussian", "psig", "trapezoid")
MF_PER_INPUT = 2
_TINY = 1e-12


#------------------------------------------------------------------------------
# Membership functions and their parameter derivatives
#------------------------------------------------------------------------------
def initial_premise(X, family):
    """Parameters [input, mf, p] spanning each input's training range."""
    lo, hi = X.min(axis=0), X.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    mid = (lo + hi) / 2
    if family == "gaussian":
        low = np.stack([lo, span / 2], axis=1)
        high = np.stack([hi, span / 2], axis=1)
    elif family == "psig":
        slope = 8.0 / span
        low = np.stack([lo - span, slope, mid, -slope], axis=1)
        high = np.stack([mid, slope, hi + span, -slope], axis=1)
    elif family == "trapezoid":
        low = np.stack([lo - span, lo - span / 2, lo + span / 4, hi - span / 4], axis=1)
        high = np.stack([lo + span / 4, hi - span / 4, hi + span / 2, hi + span], axis=1)
    else:
        raise DomainError(f"unknown membership family {family!r}")
    return np.stack([low, high], axis=1)


def membership(x, p, family):
    if family == "gaussian":
        return fuzz.gaussmf(x, p[0], p[1])
    if family == "psig":
        return fuzz.psigmf(x, p[0], p[1], p[2], p[3])
    return fuzz.trapmf(x, np.sort(p))


def membership_grad(x, p, family):
    """d mu / d p, shape [n_samples, n_params]."""
    if family == "gaussian":
        c, s = p
        mu = fuzz.gaussmf(x, c, s)
        return np.stack([mu * (x - c) / s ** 2, mu * (x - c) ** 2 / s ** 3], axis=1)
    if family == "psig":
        b1, c1, b2, c2 = p
        s1 = fuzz.sigmf(x, b1, c1)
        s2 = fuzz.sigmf(x, b2, c2)
        g1 = s1 * (1 - s1)
        g2 = s2 * (1 - s2)
        return np.stack([-c1 * g1 * s2, (x - b1) * g1 * s2, -c2 * g2 * s1, (x - b2) * g2 * s1], axis=1)
    a, b, c, d = np.sort(p)
    grad = np.zeros((x.shape[0], 4))
    rise = (x > a) & (x < b)
    fall = (x > c) & (x < d)
    width_up = max(b - a, _TINY)
    width_down = max(d - c, _TINY)
    grad[rise, 0] = (x[rise] - b) / width_up ** 2
    grad[rise, 1] = -(x[rise] - a) / width_up ** 2
    grad[fall, 2] = (d - x[fall]) / width_down ** 2
    grad[fall, 3] = (x[fall] - c) / width_down ** 2
    return grad


def _clean_premise(premise, family):
    if family == "gaussian":
        premise[..., 1] = np.maximum(np.abs(premise[..., 1]), 1e-6)
    elif family == "trapezoid":
        premise[:] = np.sort(premise, axis=-1)
    return premise


#------------------------------------------------------------------------------
# Network layers
#------------------------------------------------------------------------------
def rule_table(n_inputs):
    return np.array(list(itertools.product(range(MF_PER_INPUT), repeat=n_inputs)), dtype=np.int64)


def memberships(X, premise, family):
    n, d = X.shape
    mu = np.empty((n, d, MF_PER_INPUT))
    for i in range(d):
        for j in range(MF_PER_INPUT):
            mu[:, i, j] = membership(X[:, i], premise[i, j], family)
    return mu


def firing_strengths(X, premise, family):
    """Raw strengths [n, rules], normalized strengths, and per-sample totals.

    Samples where every rule fires at zero fall back to uniform weights.
    """
    mu = memberships(X, premise, family)
    rules = rule_table(X.shape[1])
    picked = mu[:, np.arange(X.shape[1]), rules]          # [n, rules, d]
    w = np.prod(picked, axis=2)
    total = w.sum(axis=1)
    dead = total <= _TINY
    wbar = np.where(dead[:, np.newaxis], 1.0 / rules.shape[0], w / np.where(dead, 1.0, total)[:, np.newaxis])
    return mu, w, wbar, total


def _regressors(X, wbar):
    Xa = np.hstack([X, np.ones((X.shape[0], 1))])
    return (wbar[:, :, np.newaxis] * Xa[:, np.newaxis, :]).reshape(X.shape[0], -1)


def output(X, premise, consequents, family):
    _, _, wbar, _ = firing_strengths(X, premise, family)
    return _regressors(X, wbar) @ consequents.reshape(-1)


def fit_consequents(X, y, premise, family):
    _, _, wbar, _ = firing_strengths(X, premise, family)
    theta, *_ = np.linalg.lstsq(_regressors(X, wbar), y, rcond=None)
    return theta.reshape(wbar.shape[1], X.shape[1] + 1)


def premise_gradient(X, y, premise, consequents, family):
    """d(1/2 mean (out - y)^2) / d premise with consequents held fixed."""
    n, d = X.shape
    mu, w, wbar, total = firing_strengths(X, premise, family)
    rules = rule_table(d)
    Xa = np.hstack([X, np.ones((n, 1))])
    f = Xa @ consequents.T                                 # [n, rules]
    out = np.sum(wbar * f, axis=1)
    live = total > _TINY
    d_out = (out - y) / n
    g_w = np.where(live[:, np.newaxis], d_out[:, np.newaxis] * (f - out[:, np.newaxis])
                   / np.where(live, total, 1.0)[:, np.newaxis], 0.0)
    picked = mu[:, np.arange(d), rules]
    grad = np.zeros_like(premise)
    for i in range(d):
        others = np.prod(np.delete(picked, i, axis=2), axis=2)
        for j in range(MF_PER_INPUT):
            on = rules[:, i] == j
            d_mu = np.sum(g_w[:, on] * others[:, on], axis=1)
            grad[i, j] = d_mu @ membership_grad(X[:, i], premise[i, j], family)
    return grad


def _mse(X, y, premise, consequents, family):
    return float(0.5 * np.mean((output(X, premise, consequents, family) - y) ** 2))


#------------------------------------------------------------------------------
# Classifier contract
#------------------------------------------------------------------------------
def fit(X, y, hp, seed):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.shape[1] > hp["max_inputs"]:
        raise DomainError(f"ANFIS with {X.shape[1]} inputs needs {MF_PER_INPUT ** X.shape[1]} rules; "
                          f"at most {hp['max_inputs']} inputs are allowed")
    family = hp["membership"]
    premise = initial_premise(X, family)
    trace = []
    for epoch in range(hp["epochs"]):
        consequents = fit_consequents(X, y, premise, family)
        trace.append(_mse(X, y, premise, consequents, family))
        step = hp["learning_rate"] * premise_gradient(X, y, premise, consequents, family)
        premise = _clean_premise(premise - step, family)
        if not np.all(np.isfinite(premise)) or not np.isfinite(trace[-1]):
            raise TrainingError(f"premise parameters diverged at epoch {epoch}", kind=hp.get("kind"))
    consequents = fit_consequents(X, y, premise, family)
    return {"premise": premise, "consequents": consequents}, trace


def decision(params, X, hp):
    X = np.asarray(X, dtype=float)
    return output(X, params["premise"], params["consequents"], hp["membership"]) - 0.5


def gradient_check(X, y, family, h=1e-5):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    premise = initial_premise(X, family)
    consequents = fit_consequents(X, y, premise, family)
    analytic = premise_gradient(X, y, premise, consequents, family)
    numeric = np.zeros_like(premise)
    for idx in np.ndindex(premise.shape):
        saved = premise[idx]
        premise[idx] = saved + h
        up = _mse(X, y, premise, consequents, family)
        premise[idx] = saved - h
        down = _mse(X, y, premise, consequents, family)
        premise[idx] = saved
        numeric[idx] = (up - down) / (2 * h)
    scale = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    return float(np.linalg.norm(analytic - numeric) / scale) if scale > 0 else 0.0
