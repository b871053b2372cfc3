"""Group 3: autoregressive coefficients by Burg's method."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from statsmodels.regression import linear_model

from ..errors import PreconditionError
from .descriptors import FeatureBlock, FeatureDescriptor, FeatureGroup, concat_blocks, trial_samples

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ARConfig:
    orders: tuple = (4, 8, 16, 32)


def burg_coefficients(x, order):
    """AR coefficients a_1..a_p with x_t = sum_i a_i x_{t-i} + e_t."""
    x = np.asarray(x, dtype=float)
    ar, _ = linear_model.burg(x, order=order, demean=True)
    return np.asarray(ar, dtype=float)


def ar_poles(coeffs):
    """Roots of z^p - a_1 z^(p-1) - ... - a_p; stable when all |pole| < 1."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.size == 0:
        return np.zeros(0, dtype=complex)
    return np.roots(np.r_[1.0, -coeffs])


def fit_ar(trial, order) -> FeatureBlock:
    X = trial_samples(trial)
    n_channels, n = X.shape
    if order < 1:
        raise PreconditionError(f"AR order must be positive, got {order}")
    if n <= 2 * order:
        raise PreconditionError(f"AR({order}) needs a window longer than {2 * order} samples, got {n}")

    values = np.zeros((n_channels, order))
    degenerate = 0
    for ch in range(n_channels):
        if X[ch].std() == 0:
            degenerate += 1
            continue
        coeffs = burg_coefficients(X[ch], order)
        if not np.all(np.isfinite(coeffs)):
            logger.debug("Burg fit of order %d diverged on channel %d", order, ch)
            degenerate += 1
            continue
        values[ch] = coeffs

    descriptors = [
        FeatureDescriptor(FeatureGroup.AR, "ar_coef", (ch,), (("order", order), ("lag", lag)))
        for ch in range(n_channels) for lag in range(1, order + 1)
    ]
    return FeatureBlock(values.reshape(-1), descriptors, degenerate)


def extract_ar(trial, cfg: ARConfig = ARConfig()) -> FeatureBlock:
    return concat_blocks([fit_ar(trial, order) for order in cfg.orders])
