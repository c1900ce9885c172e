"""Array-backed decision trees shared by the forest and boosting models.

Trees are stored as flat parallel arrays so that prediction over a matrix
is a short vectorized loop (one pass per tree level) instead of a Python
walk per sample.  Leaves are self-routing (they point to themselves with
a +inf threshold), which keeps the routing loop branch-free.  Split rules
are pinned for reproducibility:

* candidate thresholds are midpoints of sorted unique feature values,
* ties between equally good splits go to the lowest feature index, then
  the lowest threshold,
* routing is ``x[feature] <= threshold`` to the left child.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels

LEAF = -1


@dataclass
class Tree:
    """Flat tree; ``split_feature[i] == LEAF`` marks node ``i`` as a leaf."""

    split_feature: np.ndarray  # int32, LEAF at leaves
    threshold: np.ndarray  # float64, +inf at leaves
    left: np.ndarray  # int32, self-index at leaves
    right: np.ndarray  # int32, self-index at leaves
    value: np.ndarray  # float64 payload (class-1 frequency or regression value)
    n_node: np.ndarray  # int64 samples reaching the node
    depth: int = 0

    @property
    def n_nodes(self) -> int:
        return len(self.split_feature)

    @property
    def feature(self) -> np.ndarray:
        return self.split_feature

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row of X."""
        if _kernels.HAVE_NUMBA:
            return _kernels.route_leq(
                np.ascontiguousarray(X, dtype=np.float64),
                self.split_feature,
                self.threshold,
                self.left,
                self.right,
            )
        node = np.zeros(X.shape[0], dtype=np.int32)
        if self.depth == 0:
            return node
        rows = np.arange(X.shape[0])
        route = np.maximum(self.split_feature, 0)
        for _ in range(self.depth):
            go_left = X[rows, route[node]] <= self.threshold[node]
            node = np.where(go_left, self.left[node], self.right[node])
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def max_depth(self) -> int:
        return self.depth


class _TreeBuffer:
    """Append-only node storage while growing a tree."""

    def __init__(self) -> None:
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []
        self.n_node: list[int] = []
        self.depth = 0

    def add(self, value: float, n: int) -> int:
        i = len(self.feature)
        self.feature.append(LEAF)
        self.threshold.append(np.inf)
        self.left.append(i)  # leaves route to themselves
        self.right.append(i)
        self.value.append(value)
        self.n_node.append(n)
        return i

    def freeze(self) -> Tree:
        return Tree(
            split_feature=np.asarray(self.feature, dtype=np.int32),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.int32),
            right=np.asarray(self.right, dtype=np.int32),
            value=np.asarray(self.value, dtype=np.float64),
            n_node=np.asarray(self.n_node, dtype=np.int64),
            depth=self.depth,
        )


def _gini_best_split_numpy(A: np.ndarray, w: np.ndarray, wy: np.ndarray, min_samples_leaf: int):
    """Reference split search; returns (col, threshold, score_raw) or None.

    ``score_raw`` is the weighted child Gini times ``w_total / 2``.  Ties
    break toward the lowest column, then the lowest threshold.
    """
    m = A.shape[0]
    w_total = float(w.sum())
    wp_total = float(wy.sum())
    # ties inside equal values never affect boundary statistics, so the
    # faster non-stable sort is safe
    order = np.argsort(A, axis=0)
    xs = np.take_along_axis(A, order, axis=0)
    cum = np.cumsum(np.column_stack((w, wy))[order], axis=0)[:-1]
    valid = xs[1:] > xs[:-1]
    if min_samples_leaf > 1:
        counts = np.arange(1, m)
        ok = (counts >= min_samples_leaf) & (m - counts >= min_samples_leaf)
        valid &= ok[:, None]
    if not valid.any():
        return None
    wl = cum[:, :, 0]
    wpl = cum[:, :, 1]
    wr = w_total - wl
    wpr = wp_total - wpl
    # weighted child Gini up to the factor 2 / w_total (monotone in the argmin)
    score = wpl * (wl - wpl) / wl + wpr * (wr - wpr) / wr
    score = np.where(valid, score, np.inf)
    # column-major flatten: first minimum is lowest feature, lowest threshold
    flat = np.argmin(score.T.ravel())
    col, row = divmod(int(flat), m - 1)
    if not np.isfinite(score[row, col]):
        return None
    threshold = float((xs[row, col] + xs[row + 1, col]) / 2.0)
    return col, threshold, float(score[row, col])


def best_gini_split(A: np.ndarray, w: np.ndarray, wy: np.ndarray, min_samples_leaf: int):
    """Dispatch to the compiled boundary scan when numba is present."""
    if _kernels.HAVE_NUMBA:
        order = np.argsort(A, axis=0)
        xs = np.take_along_axis(A, order, axis=0)
        col, row, raw = _kernels.gini_scan(xs, w[order], wy[order], min_samples_leaf)
        if col < 0 or not np.isfinite(raw):
            return None
        return int(col), float((xs[row, col] + xs[row + 1, col]) / 2.0), float(raw)
    return _gini_best_split_numpy(A, w, wy, min_samples_leaf)


def grow_classification_tree(
    X: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    max_depth: int,
    max_features: int,
    rng: np.random.Generator,
    min_samples_leaf: int = 1,
    min_impurity_decrease: float = 0.0,
) -> Tree:
    """Grow a binary classification tree; leaves store weighted class-1 frequency."""
    buf = _TreeBuffer()
    d = X.shape[1]
    w_root = w.sum()
    wy = w * y
    all_feats = np.arange(d)
    root = buf.add(0.0, X.shape[0])
    stack = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        if depth > buf.depth:
            buf.depth = depth
        wn = w[idx]
        wyn = wy[idx]
        w_node = float(wn.sum())
        leaf_value = float(wyn.sum() / w_node)
        buf.value[node] = leaf_value
        buf.n_node[node] = len(idx)
        if depth >= max_depth or len(idx) < 2 * min_samples_leaf or len(idx) < 2:
            continue
        if leaf_value == 0.0 or leaf_value == 1.0:
            continue  # pure node
        if max_features < d:
            feats = np.sort(rng.choice(d, size=max_features, replace=False))
        else:
            feats = all_feats
        found = best_gini_split(X[np.ix_(idx, feats)], wn, wyn, min_samples_leaf)
        if found is None:
            continue
        col, thr, raw = found
        node_gini = 2.0 * leaf_value * (1.0 - leaf_value)
        child_gini = 2.0 * raw / w_node
        if child_gini >= node_gini - 1e-15:
            continue
        if (w_node / w_root) * (node_gini - child_gini) < min_impurity_decrease:
            continue
        f = int(feats[col])
        go_left = X[idx, f] <= thr
        left = buf.add(0.0, 0)
        right = buf.add(0.0, 0)
        buf.feature[node] = f
        buf.threshold[node] = thr
        buf.left[node] = left
        buf.right[node] = right
        stack.append((right, idx[~go_left], depth + 1))
        stack.append((left, idx[go_left], depth + 1))
    return buf.freeze()


def _mse_best_split_numpy(A: np.ndarray, r: np.ndarray):
    """Reference regression split; returns (col, threshold, gain) or None."""
    m = len(r)
    total = r.sum()
    order = np.argsort(A, axis=0)
    xs = np.take_along_axis(A, order, axis=0)
    rs = np.cumsum(r[order], axis=0)[:-1]
    valid = xs[1:] > xs[:-1]
    if not valid.any():
        return None
    nl = np.arange(1, m, dtype=np.float64)[:, None]
    nr = m - nl
    # maximizing count-weighted squared child means == minimizing total SSE
    gain = rs * rs / nl + (total - rs) ** 2 / nr
    gain = np.where(valid, gain, -np.inf)
    flat = np.argmax(gain.T.ravel())
    col, row = divmod(int(flat), m - 1)
    if not np.isfinite(gain[row, col]):
        return None
    return col, float((xs[row, col] + xs[row + 1, col]) / 2.0), float(gain[row, col])


def best_mse_split(A: np.ndarray, r: np.ndarray):
    if _kernels.HAVE_NUMBA:
        order = np.argsort(A, axis=0)
        xs = np.take_along_axis(A, order, axis=0)
        col, row, gain = _kernels.mse_scan(xs, r[order])
        if col < 0 or not np.isfinite(gain):
            return None
        return int(col), float((xs[row, col] + xs[row + 1, col]) / 2.0), float(gain)
    return _mse_best_split_numpy(A, r)


def grow_regression_tree(
    X: np.ndarray,
    r: np.ndarray,
    max_depth: int,
) -> Tree:
    """Grow a regression tree on residuals; leaves store the residual mean.

    Uses every feature at every split (boosting convention) and is fully
    deterministic: no bootstrap, no feature sampling.
    """
    buf = _TreeBuffer()
    root = buf.add(0.0, len(r))
    stack = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        if depth > buf.depth:
            buf.depth = depth
        rn = r[idx]
        buf.value[node] = float(rn.mean())
        buf.n_node[node] = len(idx)
        if depth >= max_depth or len(idx) < 2:
            continue
        found = best_mse_split(X[idx], rn)
        if found is None:
            continue
        f, thr, gain = found
        total = rn.sum()
        if gain <= total * total / len(idx) + 1e-12:
            continue  # no real SSE reduction
        go_left = X[idx, f] <= thr
        left = buf.add(0.0, 0)
        right = buf.add(0.0, 0)
        buf.feature[node] = f
        buf.threshold[node] = thr
        buf.left[node] = left
        buf.right[node] = right
        stack.append((right, idx[~go_left], depth + 1))
        stack.append((left, idx[go_left], depth + 1))
    return buf.freeze()
