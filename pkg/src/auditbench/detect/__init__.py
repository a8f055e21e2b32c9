"""Unsupervised anomaly detectors. Every ``anomaly_score`` is higher for more anomalous rows."""
from .autoencoder import AutoencoderDetector
from .iforest import IsolationForestDetector, average_path_length
from .lof import LOFDetector
from .som import SOMDetector
from .zscore import ZScoreDetector, zscore_score

DETECTORS = {
    "som": SOMDetector,
    "iforest": IsolationForestDetector,
    "lof": LOFDetector,
    "ae": AutoencoderDetector,
    "zscore": ZScoreDetector,
}

__all__ = [
    "DETECTORS", "AutoencoderDetector", "IsolationForestDetector", "LOFDetector", "SOMDetector",
    "ZScoreDetector", "average_path_length", "zscore_score",
]
