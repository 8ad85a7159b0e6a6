"""Multilevel ensembling: one classifier per flag level, blended by weight.

Predictions are n x C probability matrices. Level k uses the first q_k
basis columns, so deeper levels see richer projections of the same flag.
"""

import numpy as np

from .errors import InvalidInput
from .flag import FlagPoint
from .objectives import Dataset
from .solvers import _pairwise_sq

LAPLACE_ALPHA = 1e-3


def knn_predict_proba(train: np.ndarray, labels: np.ndarray, test: np.ndarray,
                      k: int = 5, n_classes: int = None) -> np.ndarray:
    """k-nearest-neighbor class frequencies with Laplace smoothing.

    Matrices are column-major (dim x n). Distance ties resolve to the lower
    training index; probabilities are (count + a)/(k + a C) with a = 1e-3,
    so rows sum to one exactly. n_classes defaults to max(labels) + 1.
    """
    train = np.asarray(train, dtype=float)
    test = np.asarray(test, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if n_classes is None:
        n_classes = int(labels.max()) + 1
    n_train = train.shape[1]
    if labels.shape != (n_train,):
        raise InvalidInput("labels must match the training sample count")
    if not 1 <= k <= n_train:
        raise InvalidInput(f"k={k} out of range for {n_train} training samples")
    dists = _pairwise_sq(test, train)
    # stable sort keeps lower train indices first on exact ties
    nearest = np.argsort(dists, axis=1, kind="stable")[:, :k]
    votes = labels[nearest]
    counts = np.zeros((test.shape[1], n_classes))
    for c in range(n_classes):
        counts[:, c] = (votes == c).sum(axis=1)
    return (counts + LAPLACE_ALPHA) / (k + LAPLACE_ALPHA * n_classes)


def project_levels(data, flag: FlagPoint) -> list:
    """Coordinates U_{:, :q_k}^T X for every level of the flag."""
    x = data.samples if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    return [flag.basis[:, :qk].T @ x for qk in flag.signature.dims]


def cross_entropy(preds: np.ndarray, labels: np.ndarray) -> float:
    """Mean negative log-probability of the true class, scaled by 1/(n C)."""
    preds = np.asarray(preds, dtype=float)
    labels = np.asarray(labels, dtype=int)
    n, c = preds.shape
    if labels.shape != (n,):
        raise InvalidInput("labels must match the prediction count")
    picked = np.clip(preds[np.arange(n), labels], 1e-12, None)
    return float(-np.log(picked).sum() / (n * c))


def ensemble_predict(preds: list, weights: np.ndarray) -> np.ndarray:
    """Convex combination of the per-level prediction matrices."""
    weights = np.asarray(weights, dtype=float)
    if len(preds) != weights.size:
        raise InvalidInput("one weight per level required")
    out = np.zeros_like(np.asarray(preds[0], dtype=float))
    for w, p in zip(weights, preds):
        out += w * np.asarray(p, dtype=float)
    return out


def optimal_soft_voting(preds: list, labels: np.ndarray,
                        rate: float = 0.5, max_iters: int = 2000,
                        rel_tol: float = 1e-10) -> np.ndarray:
    """Simplex weights minimizing the blended cross-entropy.

    Exponentiated-gradient (mirror) descent from uniform weights; the best
    iterate is kept and checked against the uniform point and every single
    level, so the returned weights never lose to those baselines.
    """
    labels = np.asarray(labels, dtype=int)
    d = len(preds)
    n, c = np.asarray(preds[0]).shape
    # m[i, k] = probability level k assigns to the true class of sample i
    m = np.column_stack([np.asarray(p, dtype=float)[np.arange(n), labels]
                         for p in preds])

    def objective(w):
        return float(-np.log(np.clip(m @ w, 1e-12, None)).sum() / (n * c))

    w = np.full(d, 1.0 / d)
    best_w, best_f = w.copy(), objective(w)
    prev_f = best_f
    for _ in range(max_iters):
        blend = np.clip(m @ w, 1e-12, None)
        gradient = -(m / blend[:, None]).sum(axis=0) / (n * c)
        w = w * np.exp(-rate * gradient)
        w /= w.sum()
        f = objective(w)
        if f < best_f:
            best_w, best_f = w.copy(), f
        if abs(prev_f - f) <= rel_tol * max(1.0, abs(prev_f)):
            break
        prev_f = f
    for cand in [np.eye(d)[j] for j in range(d)]:
        f = objective(cand)
        if f < best_f:
            best_w, best_f = cand, f
    return best_w


def hard_vote(preds: list, holdout_ce: np.ndarray) -> int:
    """Level (1-based) with the lowest holdout cross-entropy; ties go low."""
    holdout_ce = np.asarray(holdout_ce, dtype=float)
    if len(preds) != holdout_ce.size:
        raise InvalidInput("one holdout score per level required")
    return int(np.argmin(holdout_ce)) + 1
