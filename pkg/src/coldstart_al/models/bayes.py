"""Gaussian naive Bayes with a variance floor for degenerate features."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forest import SingleClassError

VAR_FLOOR_RATIO = 1e-9  # floor = ratio * max overall feature variance


@dataclass
class NaiveBayesModel:
    means: np.ndarray  # (2, d)
    variances: np.ndarray  # (2, d), floored
    priors: np.ndarray  # (2,)

    @classmethod
    def fit(cls, X: np.ndarray, y: np.ndarray) -> "NaiveBayesModel":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if len(np.unique(y)) < 2:
            raise SingleClassError("training data contains a single class")
        floor = VAR_FLOOR_RATIO * max(float(X.var(axis=0).max()), 1e-300)
        means = np.empty((2, X.shape[1]))
        variances = np.empty((2, X.shape[1]))
        priors = np.empty(2)
        for c in (0, 1):
            rows = X[y == c]
            means[c] = rows.mean(axis=0)
            variances[c] = np.maximum(rows.var(axis=0), floor)
            priors[c] = len(rows) / len(X)
        return cls(means=means, variances=variances, priors=priors)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """p(class 1 | x) from the per-class Gaussian log joints."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        log_joint = np.empty((X.shape[0], 2))
        for c in (0, 1):
            diff = X - self.means[c]
            log_lik = -0.5 * (
                np.log(2.0 * np.pi * self.variances[c]) + diff**2 / self.variances[c]
            ).sum(axis=1)
            log_joint[:, c] = np.log(self.priors[c]) + log_lik
        m = log_joint.max(axis=1, keepdims=True)
        norm = m[:, 0] + np.log(np.exp(log_joint - m).sum(axis=1))
        return np.exp(log_joint[:, 1] - norm)
