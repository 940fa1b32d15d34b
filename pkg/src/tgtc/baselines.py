"""Classical comparators over TF-IDF features: multinomial Naive Bayes with
additive smoothing, and L2-regularized multinomial logistic regression fit by
full-batch gradient descent. Both are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .corpus import CorpusBundle
from .errors import DivergedError
from .graph import compute_tf_idf
from .linalg import row_softmax


def tfidf_features(bundle: CorpusBundle) -> sp.csr_matrix:
    """Document-by-word TF-IDF matrix using the graph edge weighting."""
    tfidf = compute_tf_idf(bundle)
    rows = np.fromiter((k[0] for k in tfidf), dtype=np.intp, count=len(tfidf))
    cols = np.fromiter((k[1] for k in tfidf), dtype=np.intp, count=len(tfidf))
    vals = np.fromiter(tfidf.values(), dtype=np.float64, count=len(tfidf))
    return sp.csr_matrix((vals, (rows, cols)), shape=(bundle.n_doc, len(bundle.vocab)))


@dataclass
class NBModel:
    log_prior: np.ndarray       # n_class
    log_likelihood: np.ndarray  # n_class x n_word
    alpha: float


def nb_fit(features, labels: np.ndarray, alpha: float = 1.0, n_class: int | None = None) -> NBModel:
    """Multinomial NB treating TF-IDF values as fractional counts.

    Priors get +1 smoothing so classes absent from the training set stay
    finite; per-class likelihoods use additive smoothing ``alpha``.
    """
    if alpha <= 0:
        raise ValueError("smoothing alpha must be positive")
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("training set is empty")
    features = sp.csr_matrix(features, dtype=np.float64)
    if n_class is None:
        n_class = int(labels.max()) + 1
    n_word = features.shape[1]
    log_prior = np.empty(n_class)
    log_likelihood = np.empty((n_class, n_word))
    for c in range(n_class):
        members = labels == c
        log_prior[c] = np.log((members.sum() + 1.0) / (labels.size + n_class))
        class_sum = np.asarray(features[members].sum(axis=0)).ravel()
        theta = (class_sum + alpha) / (class_sum.sum() + alpha * n_word)
        log_likelihood[c] = np.log(theta)
    return NBModel(log_prior, log_likelihood, alpha)


def nb_predict(model: NBModel, features) -> tuple[np.ndarray, np.ndarray]:
    features = sp.csr_matrix(features, dtype=np.float64)
    scores = np.asarray(features @ model.log_likelihood.T) + model.log_prior
    prob = row_softmax(scores)
    return np.argmax(scores, axis=1), prob


@dataclass
class LogRegModel:
    w: np.ndarray  # n_word x n_class
    b: np.ndarray  # n_class; excluded from the L2 penalty
    l2: float


def logreg_loss_and_grads(
    w: np.ndarray,
    b: np.ndarray,
    features,
    labels: np.ndarray,
    l2: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy plus (l2/2)*||w||^2, with analytic gradients."""
    n = features.shape[0]
    logits = np.asarray(features @ w) + b
    prob = row_softmax(logits)
    picked = prob[np.arange(n), labels]
    loss = float(-np.mean(np.log(np.maximum(picked, 1e-12))) + 0.5 * l2 * np.sum(w * w))
    delta = prob.copy()
    delta[np.arange(n), labels] -= 1.0
    grad_w = np.asarray(features.T @ delta) / n + l2 * w
    grad_b = delta.mean(axis=0)
    return loss, grad_w, grad_b


def logreg_fit(
    features,
    labels: np.ndarray,
    l2: float = 1.0,
    lr: float = 0.05,
    epochs: int = 500,
    seed: int = 0,
    n_class: int | None = None,
) -> LogRegModel:
    if l2 < 0:
        raise ValueError("l2 strength must be non-negative")
    labels = np.asarray(labels)
    features = sp.csr_matrix(features, dtype=np.float64)
    if n_class is None:
        n_class = int(labels.max()) + 1
    # Zero init keeps the fit deterministic; the seed is part of the
    # interface for forward compatibility with randomized variants.
    del seed
    w = np.zeros((features.shape[1], n_class))
    b = np.zeros(n_class)
    for _ in range(epochs):
        loss, grad_w, grad_b = logreg_loss_and_grads(w, b, features, labels, l2)
        if not np.isfinite(loss):
            raise DivergedError("logistic loss diverged; try a smaller learning rate")
        w -= lr * grad_w
        b -= lr * grad_b
    return LogRegModel(w, b, l2)


def logreg_predict(model: LogRegModel, features) -> tuple[np.ndarray, np.ndarray]:
    features = sp.csr_matrix(features, dtype=np.float64)
    logits = np.asarray(features @ model.w) + model.b
    prob = row_softmax(logits)
    return np.argmax(logits, axis=1), prob
