"""Downstream classifiers: Gaussian naive Bayes, logistic regression, random forest.

Every model exposes ``predict_proba(x)`` returning class-1 probabilities.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logsumexp

from mrmrfs.dataset import Dataset
from mrmrfs.forest import ForestParams, train_forest_arrays

log = logging.getLogger(__name__)

CLASSIFIERS = ("naive_bayes", "logistic_regression", "random_forest")
NB_VAR_FLOOR = 1e-9


def _xy(x, y) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(x, Dataset):
        x, y = x.features, x.labels
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(y).astype(np.int64).ravel()
    if x.shape[0] != y.shape[0]:
        raise ValueError("row count of x and y differ")
    if not 0 < int(y.sum()) < y.size:
        raise ValueError("training labels contain a single class")
    return x, y


@dataclass
class GaussianNB:
    means: np.ndarray  # (2, m)
    variances: np.ndarray  # (2, m)
    log_prior: np.ndarray  # (2,)

    def joint_log_likelihood(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        out = np.empty((x.shape[0], 2))
        for c in (0, 1):
            v = self.variances[c]
            ll = -0.5 * np.sum(np.log(2 * np.pi * v)) - 0.5 * np.sum((x - self.means[c]) ** 2 / v, axis=1)
            out[:, c] = self.log_prior[c] + ll
        return out

    def predict_class_proba(self, x) -> np.ndarray:
        jll = self.joint_log_likelihood(x)
        return np.exp(jll - logsumexp(jll, axis=1, keepdims=True))

    def predict_proba(self, x) -> np.ndarray:
        return self.predict_class_proba(x)[:, 1]


def train_naive_bayes(x, y=None, var_floor: float = NB_VAR_FLOOR) -> GaussianNB:
    x, y = _xy(x, y)
    means = np.vstack([x[y == c].mean(axis=0) for c in (0, 1)])
    variances = np.vstack([np.maximum(x[y == c].var(axis=0), var_floor) for c in (0, 1)])
    prior = np.array([np.mean(y == 0), np.mean(y == 1)])
    return GaussianNB(means, variances, np.log(prior))


@dataclass
class LogisticRegression:
    """Weights act on features standardized with the training mean and scale."""

    coef: np.ndarray
    intercept: float
    mean: np.ndarray
    scale: np.ndarray
    converged: bool = False

    def decision_function(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        return ((x - self.mean) / self.scale) @ self.coef + self.intercept

    def predict_proba(self, x) -> np.ndarray:
        return expit(self.decision_function(x))


def logistic_loss(params: np.ndarray, xs: np.ndarray, y: np.ndarray, l2: float) -> float:
    """Mean negative log-likelihood plus ``l2/2 * |w|^2``; ``params = [w..., b]``."""
    w, b = params[:-1], params[-1]
    z = xs @ w + b
    # log(1 + e^z) - y*z, stable for large |z|
    nll = np.mean(np.logaddexp(0.0, z) - y * z)
    return float(nll + 0.5 * l2 * np.dot(w, w))


def logistic_gradient(params: np.ndarray, xs: np.ndarray, y: np.ndarray, l2: float) -> np.ndarray:
    w, b = params[:-1], params[-1]
    r = expit(xs @ w + b) - y
    gw = xs.T @ r / y.size + l2 * w
    gb = r.mean()
    return np.append(gw, gb)


def train_logreg(x, y=None, epochs: int = 500, lr: float = 0.1, l2: float = 1e-4,
                 tol: float = 1e-4) -> LogisticRegression:
    """Batch gradient descent on standardized features with a fixed epoch budget."""
    x, y = _xy(x, y)
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0] = 1.0
    xs = (x - mean) / scale
    yf = y.astype(np.float64)
    params = np.zeros(x.shape[1] + 1)
    grad = logistic_gradient(params, xs, yf, l2)
    for _ in range(epochs):
        params -= lr * grad
        grad = logistic_gradient(params, xs, yf, l2)
    converged = bool(np.linalg.norm(grad) < tol)
    if not converged:
        log.debug("logistic regression stopped after %d epochs, |grad| = %.3g",
                  epochs, np.linalg.norm(grad))
    return LogisticRegression(params[:-1].copy(), float(params[-1]), mean, scale, converged)


def fit_classifier(name: str, x, y, forest_params: ForestParams | None = None):
    if name == "naive_bayes":
        return train_naive_bayes(x, y)
    if name == "logistic_regression":
        return train_logreg(x, y)
    if name == "random_forest":
        x, y = _xy(x, y)
        return train_forest_arrays(x, y, forest_params or ForestParams())
    raise ValueError(f"unknown classifier {name!r}; valid: {', '.join(CLASSIFIERS)}")
