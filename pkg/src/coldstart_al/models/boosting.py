"""Gradient-boosted trees on log-odds with shrinkage.

Stages fit regression trees to the log-loss residual ``y - sigmoid(F)``
and apply a per-leaf Newton step, the standard recipe for binomial
deviance.  Training is deterministic (no row or feature subsampling).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .forest import SingleClassError
from .linear import sigmoid
from .trees import Tree, grow_regression_tree

_LOG_ODDS_CLIP = 1e-12


@dataclass
class BoostedTreesModel:
    initial_log_odds: float
    learning_rate: float
    trees: list[Tree] = field(default_factory=list)
    leaf_values: list[np.ndarray] = field(default_factory=list)
    train_losses: list[float] = field(default_factory=list)  # per stage, incl. stage 0
    n_features: int = 0

    @classmethod
    def fit(
        cls,
        X: np.ndarray,
        y: np.ndarray,
        n_estimators: int = 100,
        learning_rate: float = 0.1,
        max_depth: int = 3,
        seed: int = 0,
    ) -> "BoostedTreesModel":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if len(np.unique(y)) < 2:
            raise SingleClassError("training data contains a single class")
        del seed  # training is deterministic; kept for interface symmetry
        p0 = min(max(float(y.mean()), _LOG_ODDS_CLIP), 1.0 - _LOG_ODDS_CLIP)
        f0 = math.log(p0 / (1.0 - p0))
        model = cls(
            initial_log_odds=f0, learning_rate=learning_rate, n_features=X.shape[1]
        )
        F = np.full(len(y), f0)
        model.train_losses.append(_log_loss(y, F))
        for _ in range(n_estimators):
            p = sigmoid(F)
            residual = y - p
            tree = grow_regression_tree(X, residual, max_depth=max_depth)
            leaves = tree.apply(X)
            hessian = p * (1.0 - p)
            values = np.zeros(tree.n_nodes)
            for leaf in np.unique(leaves):
                mask = leaves == leaf
                num = residual[mask].sum()
                den = max(hessian[mask].sum(), 1e-12)
                values[leaf] = num / den
            model.trees.append(tree)
            model.leaf_values.append(values)
            F = F + learning_rate * values[leaves]
            model.train_losses.append(_log_loss(y, F))
        return model

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        F = np.full(X.shape[0], self.initial_log_odds)
        for tree, values in zip(self.trees, self.leaf_values):
            F += self.learning_rate * values[tree.apply(X)]
        return F

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return sigmoid(self.decision_function(X))


def _log_loss(y: np.ndarray, log_odds: np.ndarray) -> float:
    s = 2.0 * y - 1.0
    return float(np.logaddexp(0.0, -s * log_odds).mean())
