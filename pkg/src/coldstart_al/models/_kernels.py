"""Optional numba kernels for the tree hot loops.

Pure-numpy implementations in ``trees.py`` remain the reference; these
kernels compute the same quantities with identical tie-breaking (lowest
feature column, then lowest threshold) and are used when numba imports.
Sorting stays in numpy (its introsort is faster than numba's); the
kernels only do the allocation-free boundary scans and tree routing.
Everything runs single-threaded so results are bit-reproducible.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True)
def gini_scan(xs, ws, wys, min_samples_leaf):  # pragma: no cover - compiled
    """Boundary scan over per-column sorted values/weights/weighted labels.

    Returns (col, row, score_raw) with score_raw = weighted child Gini
    times ``w_total / 2``; col == -1 when no valid boundary exists.  The
    first strict minimum wins: lowest column, then lowest threshold.
    """
    m, f = xs.shape
    w_total = 0.0
    wp_total = 0.0
    for i in range(m):
        w_total += ws[i, 0]
        wp_total += wys[i, 0]
    best = np.inf
    best_col = -1
    best_row = -1
    for c in range(f):
        cw = 0.0
        cwp = 0.0
        for i in range(m - 1):
            cw += ws[i, c]
            cwp += wys[i, c]
            if xs[i + 1, c] <= xs[i, c]:
                continue
            n_left = i + 1
            if n_left < min_samples_leaf or m - n_left < min_samples_leaf:
                continue
            wl = cw
            wr = w_total - cw
            s = cwp * (wl - cwp) / wl + (wp_total - cwp) * (wr - wp_total + cwp) / wr
            if s < best:
                best = s
                best_col = c
                best_row = i
    return best_col, best_row, best


@njit(cache=True)
def mse_scan(xs, rs):  # pragma: no cover - compiled
    """Boundary scan for regression splits; returns (col, row, gain)."""
    m, f = xs.shape
    total = 0.0
    for i in range(m):
        total += rs[i, 0]
    best = -np.inf
    best_col = -1
    best_row = -1
    for c in range(f):
        acc = 0.0
        for i in range(m - 1):
            acc += rs[i, c]
            if xs[i + 1, c] <= xs[i, c]:
                continue
            nl = i + 1.0
            nr = m - nl
            gain = acc * acc / nl + (total - acc) * (total - acc) / nr
            if gain > best:
                best = gain
                best_col = c
                best_row = i
    return best_col, best_row, best


@njit(cache=True)
def route_leq(X, feature, threshold, left, right):  # pragma: no cover - compiled
    """Leaf index per row for trees that send ``x <= thr`` to the left."""
    n = X.shape[0]
    out = np.empty(n, dtype=np.int32)
    for i in range(n):
        node = 0
        ft = feature[node]
        while ft >= 0:
            if X[i, ft] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
            ft = feature[node]
        out[i] = node
    return out


@njit(cache=True)
def route_lt(X, feature, threshold, left, right):  # pragma: no cover - compiled
    """Leaf index per row for isolation trees (``x < thr`` goes left)."""
    n = X.shape[0]
    out = np.empty(n, dtype=np.int32)
    for i in range(n):
        node = 0
        ft = feature[node]
        while ft >= 0:
            if X[i, ft] < threshold[node]:
                node = left[node]
            else:
                node = right[node]
            ft = feature[node]
        out[i] = node
    return out


def warmup() -> None:
    """Force compilation of all kernels (used by tests to pay the cost once)."""
    if not HAVE_NUMBA:
        return
    xs = np.array([[0.0, 1.0], [1.0, 2.0], [2.0, 3.0]])
    ws = np.ones((3, 2))
    wys = np.array([[0.0, 1.0], [1.0, 0.0], [0.0, 0.0]])
    gini_scan(xs, ws, wys, 1)
    mse_scan(xs, wys)
    feature = np.array([0, -1, -1], dtype=np.int32)
    threshold = np.array([0.5, np.inf, np.inf])
    left = np.array([1, 1, 2], dtype=np.int32)
    right = np.array([2, 1, 2], dtype=np.int32)
    route_leq(xs, feature, threshold, left, right)
    route_lt(xs, feature, threshold, left, right)
