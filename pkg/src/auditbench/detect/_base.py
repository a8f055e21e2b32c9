from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array, check_is_fitted


class DetectorMixin:
    """Shared scoring surface: ``anomaly_score`` is higher for more anomalous rows."""

    def _validate(self, X, reset: bool) -> np.ndarray:
        X = check_array(X, dtype=np.float64, ensure_all_finite=True)
        if reset:
            self.n_features_in_ = X.shape[1]
        else:
            check_is_fitted(self, "n_features_in_")
            if X.shape[1] != self.n_features_in_:
                raise ValueError(f"X has {X.shape[1]} features, model was fitted with {self.n_features_in_}")
        return X

    def predict(self, X, tau: float = 0.21) -> np.ndarray:
        """Flag the ``ceil(tau * n)`` highest-scoring rows as anomalies (1)."""
        from ..evaluation.metrics import flag_top
        return flag_top(self.anomaly_score(X), tau).astype(np.int64)

    def fit_score(self, X, y=None) -> np.ndarray:
        return self.fit(X, y).anomaly_score(X)
