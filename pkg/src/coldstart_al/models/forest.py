"""Random forest classifier with per-tree outputs.

Bagging with Gini splits over sqrt(d) features per node.  Per-tree seeds
derive from the master seed, so a fit is bit-reproducible.  Individual
tree probabilities stay accessible because the epistemic-uncertainty
policy decomposes them.
"""

from __future__ import annotations

import math

import numpy as np

from .trees import Tree, grow_classification_tree


class SingleClassError(ValueError):
    """Supervised fit was attempted with only one class present."""


def _sample_weights(y: np.ndarray, class_weight) -> np.ndarray:
    if class_weight is None:
        return np.ones(len(y))
    if class_weight == "balanced":
        n = len(y)
        n_pos = int(y.sum())
        n_neg = n - n_pos
        w = np.where(y == 1, n / (2.0 * n_pos), n / (2.0 * n_neg))
        return w.astype(np.float64)
    raise ValueError(f"unknown class_weight: {class_weight!r}")


class RandomForest:
    def __init__(self, trees: list[Tree], n_features: int, max_depth: int):
        self.trees = trees
        self.n_features = n_features
        self.max_depth = max_depth
        self._importances: np.ndarray | None = None

    @property
    def feature_importances_(self) -> np.ndarray:
        if self._importances is None:
            self._importances = _impurity_importances(self.trees, self.n_features)
        return self._importances

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @classmethod
    def fit(
        cls,
        X: np.ndarray,
        y: np.ndarray,
        n_trees: int,
        max_depth: int,
        seed: int = 0,
        min_samples_leaf: int = 1,
        class_weight=None,
        min_impurity_decrease: float = 0.0,
        max_features: str | int = "sqrt",
    ) -> "RandomForest":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if X.ndim != 2 or len(X) != len(y):
            raise ValueError("X must be 2-D and aligned with y")
        classes = np.unique(y)
        if len(classes) < 2:
            raise SingleClassError("training data contains a single class")
        n, d = X.shape
        if max_features == "sqrt":
            m_feats = max(1, int(math.sqrt(d)))
        elif max_features == "all":
            m_feats = d
        else:
            m_feats = max(1, min(int(max_features), d))
        w = _sample_weights(y, class_weight)
        seeds = np.random.SeedSequence(seed).spawn(n_trees)
        trees = []
        for ss in seeds:
            rng = np.random.Generator(np.random.PCG64(ss))
            boot = rng.integers(0, n, size=n)
            trees.append(
                grow_classification_tree(
                    X[boot],
                    y[boot],
                    w[boot],
                    max_depth=max_depth,
                    max_features=m_feats,
                    rng=rng,
                    min_samples_leaf=min_samples_leaf,
                    min_impurity_decrease=min_impurity_decrease,
                )
            )
        return cls(trees, d, max_depth)

    def _check(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        return X

    def tree_probas(self, X: np.ndarray) -> np.ndarray:
        """Per-tree class-1 probabilities, shape (n_samples, n_trees)."""
        X = self._check(X)
        out = np.empty((X.shape[0], len(self.trees)))
        for j, tree in enumerate(self.trees):
            out[:, j] = tree.predict(X)
        return out

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Class-1 probability: arithmetic mean of the per-tree leaf frequencies."""
        X = self._check(X)
        acc = np.zeros(X.shape[0])
        for tree in self.trees:
            acc += tree.predict(X)
        return acc / len(self.trees)


def _impurity_importances(trees: list[Tree], d: int) -> np.ndarray:
    """Mean decrease in Gini impurity per feature, normalized to sum 1."""
    acc = np.zeros(d)
    for tree in trees:
        n_root = tree.n_node[0]
        for i in range(tree.n_nodes):
            f = tree.feature[i]
            if f < 0:
                continue
            l, r = tree.left[i], tree.right[i]
            nl, nr = tree.n_node[l], tree.n_node[r]
            nn = tree.n_node[i]
            gi = _gini(tree.value[i])
            child = (nl * _gini(tree.value[l]) + nr * _gini(tree.value[r])) / nn
            acc[f] += (nn / n_root) * (gi - child)
    total = acc.sum()
    return acc / total if total > 0 else acc


def _gini(p: float) -> float:
    return 2.0 * p * (1.0 - p)
