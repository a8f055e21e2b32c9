from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._base import DetectorMixin


class ZScoreDetector(DetectorMixin, BaseEstimator):
    """Absolute z-score of a single column, using training mean and std."""

    def __init__(self, column: int = 0):
        self.column = column

    def fit(self, X, y=None):
        X = self._validate(X, reset=True)
        x = X[:, self.column]
        std = x.std()
        if std == 0:
            raise ValueError(f"column {self.column} has zero variance")
        self.mean_ = float(x.mean())
        self.std_ = float(std)
        return self

    def anomaly_score(self, X) -> np.ndarray:
        check_is_fitted(self, "mean_")
        X = self._validate(X, reset=False)
        return np.abs(X[:, self.column] - self.mean_) / self.std_


def zscore_score(matrix, column: int = 0) -> np.ndarray:
    """Score a matrix column against its own mean and standard deviation."""
    return ZScoreDetector(column).fit_score(matrix)
