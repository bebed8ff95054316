"""Energy-style detector: thresholds the mean of the difference vector.

The decision statistic is the per-sample feature mean; the threshold is a
nearest-rank percentile of the training means. Since the mean is computed
with an exactly rounded sum, the detector output is bit-identical whether
or not features were sorted beforehand.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from .base import nearest_rank, row_mean


class AedDetector:
    name = "aed"

    def __init__(self, percentile: float = 0.90):
        if not 0.0 < percentile <= 1.0:
            raise ConfigError(f"percentile must be in (0, 1], got {percentile}")
        self.percentile = percentile
        self.threshold: float | None = None

    def fit(self, train: np.ndarray) -> "AedDetector":
        train = np.asarray(train, dtype=np.float64)
        if train.ndim != 2 or len(train) == 0:
            raise ConfigError("training set must be a non-empty 2-D array")
        means = np.array([row_mean(row) for row in train])
        self.threshold = nearest_rank(means, self.percentile)
        return self

    def _check_fitted(self) -> None:
        if self.threshold is None:
            raise RuntimeError("detector not fitted")

    def score(self, x: np.ndarray) -> float:
        return row_mean(x)

    def score_batch(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return np.array([row_mean(row) for row in x])

    def predict_batch(self, x: np.ndarray) -> np.ndarray:
        """Anomaly iff mean >= threshold (boundary inclusive)."""
        self._check_fitted()
        return self.score_batch(x) >= self.threshold

    def get_state(self) -> dict:
        self._check_fitted()
        return {"percentile": self.percentile, "threshold": self.threshold}

    @classmethod
    def from_state(cls, state: dict) -> "AedDetector":
        det = cls(percentile=state["percentile"])
        det.threshold = float(state["threshold"])
        return det
