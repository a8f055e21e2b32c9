from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._base import DetectorMixin


def _sq_dists(X: np.ndarray, W: np.ndarray) -> np.ndarray:
    d = (X * X).sum(1)[:, None] - 2.0 * X @ W.T + (W * W).sum(1)[None, :]
    return np.maximum(d, 0.0)


class SOMDetector(DetectorMixin, BaseEstimator):
    """Square self-organizing map scored by quantization error.

    Training presents mini-batches. Each unit moves towards the batch samples
    with Gaussian grid-neighbourhood weights ``h``; the summed update is divided
    by ``max(sum h, 1)`` so a single sample reproduces the sequential rule and
    a unit hit by many samples moves towards their weighted mean. Learning rate
    and radius decay as ``exp(-t / n_iterations)``.
    """

    def __init__(self, grid_size: int = 10, learning_rate: float = 0.5, sigma: float = 0.5,
                 n_iterations: int = 500, batch_size: int = 128, random_state: int = 0):
        self.grid_size = grid_size
        self.learning_rate = learning_rate
        self.sigma = sigma
        self.n_iterations = n_iterations
        self.batch_size = batch_size
        self.random_state = random_state

    def fit(self, X, y=None):
        X = self._validate(X, reset=True)
        if X.shape[0] == 0:
            raise ValueError("cannot train a SOM on an empty matrix")
        if not 0 <= self.learning_rate <= 1:
            raise ValueError("learning_rate must lie in [0, 1]")
        rng = np.random.default_rng(self.random_state)
        g = self.grid_size
        lo, hi = X.min(0), X.max(0)
        W = rng.uniform(lo, hi, size=(g * g, X.shape[1]))
        gy, gx = np.divmod(np.arange(g * g), g)
        coords = np.column_stack([gy, gx]).astype(np.float64)
        grid_d2 = ((coords[:, None, :] - coords[None, :, :]) ** 2).sum(-1)

        n = X.shape[0]
        order = rng.permutation(n)
        cursor = 0
        T = max(self.n_iterations, 1)
        for t in range(self.n_iterations):
            if cursor + self.batch_size > n:
                order = rng.permutation(n)
                cursor = 0
            batch = X[order[cursor:cursor + self.batch_size]]
            cursor += self.batch_size
            decay = np.exp(-t / T)
            alpha, sig = self.learning_rate * decay, self.sigma * decay
            bmu = _sq_dists(batch, W).argmin(1)
            h = np.exp(-grid_d2[bmu] / (2.0 * sig * sig))       # batch x units
            mass = h.sum(0)
            W += alpha * (h.T @ batch - mass[:, None] * W) / np.maximum(mass, 1.0)[:, None]
        self.weights_ = W
        self.coords_ = coords
        return self

    def bmu(self, X) -> np.ndarray:
        check_is_fitted(self, "weights_")
        X = self._validate(X, reset=False)
        return _sq_dists(X, self.weights_).argmin(1)

    def anomaly_score(self, X) -> np.ndarray:
        """Euclidean distance from each row to its best matching unit."""
        X = self._validate(X, reset=False)
        out = np.empty(X.shape[0])
        for start in range(0, X.shape[0], 4096):
            chunk = X[start:start + 4096]
            idx = _sq_dists(chunk, self.weights_).argmin(1)
            out[start:start + 4096] = np.linalg.norm(chunk - self.weights_[idx], axis=1)
        return out
