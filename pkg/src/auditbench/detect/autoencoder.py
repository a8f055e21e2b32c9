"""Fully connected autoencoder trained with Adam, in plain numpy.

With ``cardinalities`` set, the leading columns of ``X`` hold category
indices that are looked up in trainable embedding tables; the model then
reconstructs the concatenated embedding + numerical representation and
gradients of the loss flow into the table rows.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..encode.encoders import embed_concat, init_embedding_tables
from ._base import DetectorMixin


class AutoencoderDetector(DetectorMixin, BaseEstimator):
    def __init__(self, hidden=(64, 16, 4, 16, 64), epochs: int = 20, batch_size: int = 128,
                 learning_rate: float = 1e-3, negative_slope: float = 0.01,
                 cardinalities=None, embedding_dims=None, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8, random_state: int = 0):
        self.hidden = hidden
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.negative_slope = negative_slope
        self.cardinalities = cardinalities
        self.embedding_dims = embedding_dims
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.random_state = random_state

    # ------------------------------------------------------------ structure
    @property
    def _n_cat(self) -> int:
        return len(self.cardinalities) if self.cardinalities else 0

    def _dims(self) -> list[int]:
        if self.embedding_dims is not None:
            return list(self.embedding_dims)
        from ..encode.encoders import embedding_dims
        from ..encode.schema import ColumnSchema
        return embedding_dims([ColumnSchema(str(j), "categorical", {str(i): i for i in range(n)})
                               for j, n in enumerate(self.cardinalities or [])])

    def initialize(self, n_features: int):
        """Seeded parameter initialisation (Glorot-uniform weights, zero biases)."""
        rng = np.random.default_rng(self.random_state)
        self.n_features_in_ = n_features
        self.tables_ = []
        if self._n_cat:
            dims = self._dims()
            self.tables_ = init_embedding_tables(self.cardinalities, dims, self.random_state)
            width = sum(dims) + n_features - self._n_cat
        else:
            width = n_features
        sizes = [width, *self.hidden, width]
        self.weights_ = []
        self.biases_ = []
        for a, b in zip(sizes[:-1], sizes[1:]):
            limit = np.sqrt(6.0 / (a + b))
            self.weights_.append(rng.uniform(-limit, limit, size=(a, b)))
            self.biases_.append(np.zeros(b))
        self.history_ = []
        return self

    def parameters(self) -> list[np.ndarray]:
        return [*self.weights_, *self.biases_, *self.tables_]

    def _split(self, X: np.ndarray):
        idx = X[:, :self._n_cat].astype(np.int64)
        for j, n in enumerate(self.cardinalities or []):
            col = idx[:, j]
            col[(col < 0) | (col > n)] = n
        return idx, X[:, self._n_cat:]

    def represent(self, X) -> np.ndarray:
        """Model input/target representation (embeddings looked up when enabled)."""
        X = np.asarray(X, dtype=np.float64)
        if not self._n_cat:
            return X
        idx, num = self._split(X)
        return embed_concat(idx, self.tables_, num)

    # ------------------------------------------------------- forward / back
    def _act(self, z):
        return np.where(z > 0, z, self.negative_slope * z)

    def _forward(self, x0):
        acts, pres = [x0], []
        a = x0
        last = len(self.weights_) - 1
        for i, (W, b) in enumerate(zip(self.weights_, self.biases_)):
            z = a @ W + b
            pres.append(z)
            a = z if i == last else self._act(z)
            acts.append(a)
        return acts, pres

    def reconstruct(self, X) -> np.ndarray:
        return self._forward(self.represent(X))[0][-1]

    def loss_and_gradients(self, X):
        """Mean squared reconstruction error and its gradient for every parameter.

        Gradients are returned in :meth:`parameters` order.
        """
        X = np.asarray(X, dtype=np.float64)
        x0 = self.represent(X)
        acts, pres = self._forward(x0)
        diff = acts[-1] - x0
        B, D = x0.shape
        loss = float((diff ** 2).sum() / (B * D))
        g = 2.0 * diff / (B * D)
        gW = [None] * len(self.weights_)
        gb = [None] * len(self.biases_)
        for i in range(len(self.weights_) - 1, -1, -1):
            gW[i] = acts[i].T @ g
            gb[i] = g.sum(0)
            g = g @ self.weights_[i].T
            if i > 0:
                g = g * np.where(pres[i - 1] > 0, 1.0, self.negative_slope)
        gT = []
        if self._n_cat:
            g_in = g - 2.0 * diff / (B * D)     # input path + target path
            idx, _ = self._split(X)
            offset = 0
            for j, T in enumerate(self.tables_):
                d = T.shape[1]
                gt = np.zeros_like(T)
                np.add.at(gt, idx[:, j], g_in[:, offset:offset + d])
                gT.append(gt)
                offset += d
        return loss, [*gW, *gb, *gT]

    # ------------------------------------------------------------- training
    def fit(self, X, y=None):
        X = self._validate(X, reset=True)
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        self.initialize(X.shape[1])
        rng = np.random.default_rng(self.random_state + 1)
        params = self.parameters()
        m = [np.zeros_like(p) for p in params]
        v = [np.zeros_like(p) for p in params]
        step = 0
        n = X.shape[0]
        for epoch in range(self.epochs):
            order = rng.permutation(n)
            total = 0.0
            for s in range(0, n, self.batch_size):
                batch = X[order[s:s + self.batch_size]]
                loss, grads = self.loss_and_gradients(batch)
                if not np.isfinite(loss):
                    raise FloatingPointError(
                        f"non-finite loss at epoch {epoch + 1}; lower the learning rate or rescale the inputs")
                total += loss * len(batch)
                step += 1
                for p, g, mi, vi in zip(params, grads, m, v):
                    mi *= self.beta1
                    mi += (1 - self.beta1) * g
                    vi *= self.beta2
                    vi += (1 - self.beta2) * g * g
                    mhat = mi / (1 - self.beta1 ** step)
                    vhat = vi / (1 - self.beta2 ** step)
                    p -= self.learning_rate * mhat / (np.sqrt(vhat) + self.eps)
            self.history_.append(total / n)
        return self

    def anomaly_score(self, X) -> np.ndarray:
        """Squared L2 distance between the representation and its reconstruction."""
        check_is_fitted(self, "weights_")
        X = self._validate(X, reset=False)
        x0 = self.represent(X)
        return ((self._forward(x0)[0][-1] - x0) ** 2).sum(1)
