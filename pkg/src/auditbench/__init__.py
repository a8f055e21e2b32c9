"""Vehicle Claims generation and unsupervised anomaly-detection benchmarking."""

__version__ = "0.1.0"
