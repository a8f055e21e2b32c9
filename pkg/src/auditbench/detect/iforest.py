from __future__ import annotations

import math
import warnings

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._base import DetectorMixin

EULER_GAMMA = 0.5772156649015329


def average_path_length(n) -> np.ndarray:
    """Average unsuccessful-search path length ``c(n)`` of a binary search tree."""
    n = np.asarray(n, dtype=np.float64)
    out = np.zeros_like(n)
    out[n == 2] = 1.0
    big = n > 2
    out[big] = 2.0 * (np.log(n[big] - 1.0) + EULER_GAMMA) - 2.0 * (n[big] - 1.0) / n[big]
    return out


class IsolationForestDetector(DetectorMixin, BaseEstimator):
    """Isolation forest with trees stored as flat node arrays.

    A node splits on a feature drawn uniformly from those that are not
    constant within the node, at a value uniform between their min and max.
    """

    def __init__(self, n_estimators: int = 100, max_samples: int | None = None, random_state: int = 0):
        self.n_estimators = n_estimators
        self.max_samples = max_samples
        self.random_state = random_state

    def fit(self, X, y=None):
        X = self._validate(X, reset=True)
        n = X.shape[0]
        psi = min(256, n) if self.max_samples is None else self.max_samples
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if not 2 <= psi <= n:
            raise ValueError(f"max_samples must lie in [2, {n}], got {psi}")
        if np.all(X == X[0]):
            warnings.warn("all rows are identical; every tree is a single leaf", stacklevel=2)
        self.psi_ = int(psi)
        self.height_limit_ = int(math.ceil(math.log2(psi)))
        rng = np.random.default_rng(self.random_state)
        feature, threshold, left, right, size, depth, roots = [], [], [], [], [], [], []
        for _ in range(self.n_estimators):
            sample = X[rng.choice(n, size=psi, replace=False)]
            roots.append(len(feature))
            stack = [(np.arange(psi), 0, None, None)]
            while stack:
                rows, d, parent, side = stack.pop()
                node = len(feature)
                if parent is not None:
                    (left if side == 0 else right)[parent] = node
                feature.append(-1); threshold.append(0.0); left.append(-1); right.append(-1)
                size.append(len(rows)); depth.append(d)
                if d >= self.height_limit_ or len(rows) <= 1:
                    continue
                part = sample[rows]
                lo, hi = part.min(0), part.max(0)
                candidates = np.flatnonzero(hi > lo)
                if candidates.size == 0:
                    continue
                q = int(rng.choice(candidates))
                p = rng.uniform(lo[q], hi[q])
                goes_left = part[:, q] < p
                feature[node] = q
                threshold[node] = p
                stack.append((rows[~goes_left], d + 1, node, 1))
                stack.append((rows[goes_left], d + 1, node, 0))
        self.feature_ = np.asarray(feature, dtype=np.int64)
        self.threshold_ = np.asarray(threshold, dtype=np.float64)
        self.left_ = np.asarray(left, dtype=np.int64)
        self.right_ = np.asarray(right, dtype=np.int64)
        self.node_size_ = np.asarray(size, dtype=np.int64)
        self.node_depth_ = np.asarray(depth, dtype=np.int64)
        self.roots_ = np.asarray(roots, dtype=np.int64)
        return self

    def path_lengths(self, X) -> np.ndarray:
        """Per-tree path length ``depth + c(leaf size)``, shape ``(n, n_estimators)``."""
        check_is_fitted(self, "roots_")
        X = self._validate(X, reset=False)
        rows = np.arange(X.shape[0])
        out = np.empty((X.shape[0], len(self.roots_)))
        for t, root in enumerate(self.roots_):
            node = np.full(X.shape[0], root)
            while True:
                internal = self.feature_[node] >= 0
                if not internal.any():
                    break
                f = self.feature_[node[internal]]
                go_left = X[rows[internal], f] < self.threshold_[node[internal]]
                node[internal] = np.where(go_left, self.left_[node[internal]], self.right_[node[internal]])
            out[:, t] = self.node_depth_[node] + average_path_length(self.node_size_[node])
        return out

    def anomaly_score(self, X) -> np.ndarray:
        """``2 ** (-E[h(x)] / c(psi))``, in (0, 1]."""
        mean_h = self.path_lengths(X).mean(1)
        return np.power(2.0, -mean_h / average_path_length(self.psi_))
