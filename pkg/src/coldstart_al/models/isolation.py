"""Isolation forest for unsupervised outlier ranking.

Scores follow the classic definition: ``2 ** (-E[h(x)] / c(m))`` where
``h`` is the path length in a randomly grown isolation tree, truncated at
``ceil(log2(m))`` with the standard average-path-length adjustment at the
truncation node, and ``m`` is the per-tree subsample size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels

EULER_GAMMA = 0.5772156649015329

_LEAF = -1


def average_path_length(n: int) -> float:
    """c(n): expected path length of an unsuccessful BST search among n points."""
    if n <= 1:
        return 0.0
    if n == 2:
        return 1.0
    harmonic = math.log(n - 1) + EULER_GAMMA
    return 2.0 * harmonic - 2.0 * (n - 1) / n


@dataclass
class _IsoTree:
    feature: np.ndarray  # _LEAF at leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_size: np.ndarray
    # depth + c(size) per node, so a routed point's path length is one lookup
    path_length: np.ndarray

    def path_lengths(self, X: np.ndarray) -> np.ndarray:
        if _kernels.HAVE_NUMBA:
            node = _kernels.route_lt(
                np.ascontiguousarray(X, dtype=np.float64),
                self.feature,
                self.threshold,
                self.left,
                self.right,
            )
            return self.path_length[node]
        n = X.shape[0]
        node = np.zeros(n, dtype=np.int32)
        rows = np.arange(n)
        route = np.maximum(self.feature, 0)
        thresh = np.where(self.feature >= 0, self.threshold, -np.inf)
        while True:
            internal = self.feature[node] >= 0
            if not internal.any():
                break
            go_left = X[rows, route[node]] < thresh[node]
            node = np.where(internal & go_left, self.left[node], node)
            node = np.where(internal & ~go_left, self.right[node], node)
        return self.path_length[node]


def _grow_iso_tree(X: np.ndarray, height_limit: int, rng: np.random.Generator) -> _IsoTree:
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    leaf_size: list[int] = []
    path: list[float] = []

    def new_node(size: int, depth: int) -> int:
        feature.append(_LEAF)
        threshold.append(np.inf)
        left.append(_LEAF)
        right.append(_LEAF)
        leaf_size.append(size)
        path.append(depth + average_path_length(size))
        return len(feature) - 1

    def build(idx: np.ndarray, depth: int) -> int:
        node = new_node(len(idx), depth)
        if len(idx) <= 1 or depth >= height_limit:
            return node
        sub = X[idx]
        lo = sub.min(axis=0)
        hi = sub.max(axis=0)
        valid = np.nonzero(hi > lo)[0]
        if valid.size == 0:
            return node  # all duplicate points
        f = int(valid[rng.integers(valid.size)])
        p = float(rng.uniform(lo[f], hi[f]))
        go_left = sub[:, f] < p
        feature[node] = f
        threshold[node] = p
        left[node] = build(idx[go_left], depth + 1)
        right[node] = build(idx[~go_left], depth + 1)
        return node

    build(np.arange(X.shape[0]), 0)
    return _IsoTree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        leaf_size=np.asarray(leaf_size, dtype=np.int64),
        path_length=np.asarray(path, dtype=np.float64),
    )


class IsolationForest:
    """Ensemble of randomly grown isolation trees.

    Per-tree subsamples are drawn without replacement and capped at
    ``min(max_samples, n)``; with the default cap of 256 this matches the
    usual configuration of 100 trees over 256-point subsamples.
    """

    def __init__(self, trees: list[_IsoTree], sample_size: int, n_features: int):
        self.trees = trees
        self.sample_size = sample_size
        self.n_features = n_features
        self.c_norm = average_path_length(sample_size)

    @classmethod
    def fit(
        cls,
        X: np.ndarray,
        n_trees: int = 100,
        max_samples: int = 256,
        seed: int = 0,
    ) -> "IsolationForest":
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValueError("isolation forest requires a non-empty 2-D sample")
        n = X.shape[0]
        m = min(max_samples, n)
        height_limit = int(math.ceil(math.log2(max(m, 2))))
        seeds = np.random.SeedSequence(seed).spawn(n_trees)
        trees = []
        for ss in seeds:
            rng = np.random.Generator(np.random.PCG64(ss))
            idx = rng.choice(n, size=m, replace=False) if m < n else np.arange(n)
            trees.append(_grow_iso_tree(X[idx], height_limit, rng))
        return cls(trees, m, X.shape[1])

    def score(self, X: np.ndarray) -> np.ndarray:
        """Anomaly scores in (0, 1); higher means more outlier-like."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ValueError(
                f"expected {self.n_features} features, got {X.shape[1]}"
            )
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            total += tree.path_lengths(X)
        mean_path = total / len(self.trees)
        return np.power(2.0, -mean_path / self.c_norm)
