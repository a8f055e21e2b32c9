from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._base import DetectorMixin

_FLOOR = 1e-12
_CHUNK = 1024
_TIE_RTOL = 1e-10     # distances this close to the k-th count as ties


class LOFDetector(DetectorMixin, BaseEstimator):
    """Local outlier factor with Euclidean distance.

    Neighbourhoods include every training point tied with the k-th nearest
    distance (up to a relative 1e-10, absorbing rounding noise), so scores do not depend on row order. Query rows use training
    neighbours only; ``training_scores_`` holds the LOF of the training rows
    computed without self-matches.
    """

    def __init__(self, n_neighbors: int = 20):
        self.n_neighbors = n_neighbors

    def _neighbours(self, Q: np.ndarray, offset: int | None = None):
        """k-distance neighbourhoods of the rows of ``Q`` among the training rows.

        BLAS distances shortlist candidates; the final distances are computed
        pair by pair so they do not depend on matrix layout.
        """
        X, sq = self.X_, self._sq_norms
        k = self.n_neighbors
        out = []
        for s in range(0, Q.shape[0], _CHUNK):
            q = Q[s:s + _CHUNK]
            qsq = (q * q).sum(1)
            d2 = qsq[:, None] - 2.0 * q @ X.T + sq[None, :]
            if offset is not None:
                d2[np.arange(len(q)), np.arange(offset + s, offset + s + len(q))] = np.inf
            kth = np.partition(d2, k - 1, axis=1)[:, k - 1]
            slack = 1e-7 * (qsq + sq.max()) + 1e-12
            for i in range(len(q)):
                cand = np.flatnonzero(d2[i] <= kth[i] + slack[i])
                d = cdist(q[i:i + 1], X[cand])[0]
                kd = np.partition(d, k - 1)[k - 1]
                keep = d <= kd * (1.0 + _TIE_RTOL)
                out.append((cand[keep], d[keep], kd))
        return out

    def _lrd(self, hoods) -> np.ndarray:
        lrd = np.empty(len(hoods))
        for i, (idx, d, _) in enumerate(hoods):
            reach = np.maximum(self.k_distance_[idx], d)
            lrd[i] = 1.0 / max(reach.mean(), _FLOOR)
        return lrd

    def _lof(self, hoods, lrd_q) -> np.ndarray:
        return np.array([self.lrd_[idx].mean() for idx, _, _ in hoods]) / lrd_q

    def fit(self, X, y=None):
        X = self._validate(X, reset=True)
        if not 1 <= self.n_neighbors < X.shape[0]:
            raise ValueError(f"n_neighbors must lie in [1, {X.shape[0] - 1}]")
        self.X_ = X
        hoods = self._neighbours(X, offset=0)
        self.k_distance_ = np.array([h[2] for h in hoods])
        self.lrd_ = self._lrd(hoods)
        self.training_scores_ = self._lof(hoods, self.lrd_)
        return self

    @property
    def _sq_norms(self) -> np.ndarray:
        return (self.X_ * self.X_).sum(1)

    def anomaly_score(self, X) -> np.ndarray:
        check_is_fitted(self, "lrd_")
        X = self._validate(X, reset=False)
        hoods = self._neighbours(X)
        return self._lof(hoods, self._lrd(hoods))
