"""Classifier-independent ranking: univariate separability, normalize-and-sum,
then a single top-down pass that demotes features correlated with better ones."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, PreconditionError

logger = logging.getLogger(__name__)

# scores for zero-variance denominators are capped here before normalization
SENTINEL = 1e6
RELATIVE_VARIANCE_FLOOR = 1e-12
MEASURES = ("mahalanobis", "bhattacharyya", "scatter")


def _class_stats(X, y):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, np.newaxis]
    y = np.asarray(y).reshape(-1)
    if X.shape[0] != y.shape[0]:
        raise DomainError(f"{X.shape[0]} rows but {y.shape[0]} labels")
    classes = np.unique(y)
    if len(classes) != 2:
        raise DomainError(f"separability needs exactly two classes, got {len(classes)}")
    stats = []
    for cls in classes:
        Xc = X[y == cls]
        if Xc.shape[0] < 2:
            raise DomainError(f"class {cls} has fewer than 2 samples")
        stats.append((Xc.shape[0], Xc.mean(axis=0), Xc.var(axis=0)))
    return stats


def _ratio(num, den):
    """num / den with 0/0 -> 0 and x/0 -> SENTINEL, capped at SENTINEL."""
    zero = den <= 0
    out = np.where(zero, np.where(num > 0, SENTINEL, 0.0), num / np.where(zero, 1.0, den))
    return np.minimum(out, SENTINEL)


def mahalanobis_scores(X, y):
    (n0, m0, v0), (n1, m1, v1) = _class_stats(X, y)
    pooled = (n0 * v0 + n1 * v1) / (n0 + n1)
    return _ratio((m0 - m1) ** 2, pooled)


def bhattacharyya_scores(X, y):
    (_, m0, v0), (_, m1, v1) = _class_stats(X, y)
    # floor relative to the pair spread: rescaling a column leaves the score unchanged
    floor = RELATIVE_VARIANCE_FLOOR * (v0 + v1)
    v0 = np.maximum(v0, floor)
    v1 = np.maximum(v1, floor)
    total = v0 + v1
    spread = np.divide(total, 2.0 * np.sqrt(v0 * v1), out=np.ones_like(total), where=total > 0)
    score = _ratio(0.25 * (m0 - m1) ** 2, total) + 0.5 * np.log(spread)
    return np.minimum(score, SENTINEL)


def scatter_scores(X, y):
    (n0, m0, v0), (n1, m1, v1) = _class_stats(X, y)
    n = n0 + n1
    mean = (n0 * m0 + n1 * m1) / n
    between = (n0 * (m0 - mean) ** 2 + n1 * (m1 - mean) ** 2) / n
    within = (n0 * v0 + n1 * v1) / n
    return _ratio(between, within)


def mahalanobis_1d(col, labels):
    return float(mahalanobis_scores(np.asarray(col, dtype=float)[:, np.newaxis], labels)[0])


def bhattacharyya_1d(col, labels):
    return float(bhattacharyya_scores(np.asarray(col, dtype=float)[:, np.newaxis], labels)[0])


def scatter_1d(col, labels):
    return float(scatter_scores(np.asarray(col, dtype=float)[:, np.newaxis], labels)[0])


def separability_scores(X, y):
    """[n_features, 3] array of (mahalanobis, bhattacharyya, scatter)."""
    return np.stack([mahalanobis_scores(X, y), bhattacharyya_scores(X, y), scatter_scores(X, y)], axis=1)


#------------------------------------------------------------------------------
# Ranking
#------------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class RankedFeatures:
    order: np.ndarray           # matrix column indices, best first
    scores: np.ndarray          # demoted combined score, aligned with ``columns``
    components: np.ndarray      # raw (mahalanobis, bhattacharyya, scatter), aligned with ``columns``
    columns: np.ndarray         # the matrix columns that were ranked
    combined: np.ndarray        # combined score before demotion

    def score_of(self, column):
        return float(self.scores[np.searchsorted(self.columns, column)])


def _minmax(values):
    lo, hi = values.min(), values.max()
    if hi - lo <= 0:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def _standardized(X):
    centered = X - X.mean(axis=0)
    norm = np.sqrt(np.sum(centered ** 2, axis=0))
    constant = norm <= 1e-12 * np.maximum(1.0, np.abs(X).max(axis=0)) * np.sqrt(X.shape[0])
    return np.where(constant, 0.0, centered / np.where(constant, 1.0, norm))


def preceding_max_correlation(X, chunk=256):
    """For every column j, max |corr(X_i, X_j)| over the columns i < j."""
    Z = _standardized(np.asarray(X, dtype=float))
    n_features = Z.shape[1]
    out = np.zeros(n_features)
    for start in range(0, n_features, chunk):
        end = min(start + chunk, n_features)
        block = Z[:, start:end]
        best = np.triu(np.abs(block.T @ block), k=1).max(axis=0)
        if start:
            best = np.maximum(best, np.abs(Z[:, :start].T @ block).max(axis=0))
        out[start:end] = best
    return np.minimum(out, 1.0)


def _descending(scores, columns):
    return columns[np.lexsort((columns, -scores))]


def rank_independent(matrix, columns=None, exponent=1.0) -> RankedFeatures:
    """Rank ``columns`` of ``matrix`` (all by default); ties go to the lower column index."""
    X = matrix.values
    columns = np.arange(X.shape[1]) if columns is None else np.sort(np.asarray(columns, dtype=np.int64))
    if columns.size == 0:
        raise PreconditionError("nothing to rank")
    sub = X[:, columns]
    components = separability_scores(sub, matrix.labels)
    combined = sum(_minmax(components[:, m]) for m in range(components.shape[1]))

    position = np.lexsort((np.arange(columns.size), -combined))
    max_corr = preceding_max_correlation(sub[:, position])
    demoted = np.empty_like(combined)
    demoted[position] = combined[position] * (1.0 - max_corr ** exponent)

    order = _descending(demoted, columns)
    logger.debug("Ranked %d columns; %d demoted to zero", columns.size, int(np.sum(demoted[combined > 0] == 0)))
    return RankedFeatures(order=order, scores=demoted, components=components, columns=columns, combined=combined)


def shortlist(ranked: RankedFeatures, n=200):
    if n < 1:
        raise PreconditionError(f"shortlist size must be positive, got {n}")
    return [int(i) for i in ranked.order[:n]]
