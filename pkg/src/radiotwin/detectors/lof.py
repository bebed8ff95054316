"""Local outlier factor in novelty mode: densities come from training data
only, test points are scored against that fixed reference.

Definitions follow the classic reachability formulation: k-distance per
training point, reachability distance reach(p, o) = max(kdist(o), d(p, o)),
local reachability density lrd(p) = 1 / mean reachability, and the score is
the ratio of the neighbors' mean lrd to the point's own lrd. A small floor
guards the division when duplicates exceed k.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from .neighbors import knn

LRD_FLOOR = 1e-12


class LofDetector:
    name = "lof"

    def __init__(self, k: int = 100, decision_threshold: float = 1.5):
        if k < 1:
            raise ConfigError(f"k must be >= 1, got {k}")
        self.k = k
        self.decision_threshold = decision_threshold
        self.train: np.ndarray | None = None
        self.kdist: np.ndarray | None = None
        self.lrd: np.ndarray | None = None

    def fit(self, train: np.ndarray) -> "LofDetector":
        train = np.ascontiguousarray(train, dtype=np.float64)
        if train.ndim != 2 or len(train) == 0:
            raise ConfigError("training set must be a non-empty 2-D array")
        if self.k >= len(train):
            raise ConfigError(
                f"k={self.k} too large for {len(train)} training samples"
            )
        idx, dist = knn(train, train, self.k, exclude_self=True)
        self.kdist = dist[:, -1].copy()
        reach = np.maximum(self.kdist[idx], dist)
        self.lrd = 1.0 / np.maximum(reach.mean(axis=1), LRD_FLOOR)
        self.train = train
        return self

    def _check_fitted(self) -> None:
        if self.train is None:
            raise RuntimeError("detector not fitted")

    def score(self, x: np.ndarray) -> float:
        return float(self.score_batch(np.atleast_2d(x))[0])

    def score_batch(self, x: np.ndarray) -> np.ndarray:
        """Outlier degree of each row relative to the training density."""
        self._check_fitted()
        x = np.atleast_2d(np.ascontiguousarray(x, dtype=np.float64))
        idx, dist = knn(self.train, x, self.k, exclude_self=False)
        reach = np.maximum(self.kdist[idx], dist)
        lrd_x = 1.0 / np.maximum(reach.mean(axis=1), LRD_FLOOR)
        return self.lrd[idx].mean(axis=1) / lrd_x

    def predict_batch(self, x: np.ndarray) -> np.ndarray:
        return self.score_batch(x) > self.decision_threshold

    def get_state(self) -> dict:
        self._check_fitted()
        return {
            "k": self.k,
            "decision_threshold": self.decision_threshold,
            "train": self.train.tolist(),
            "kdist": self.kdist.tolist(),
            "lrd": self.lrd.tolist(),
        }

    @classmethod
    def from_state(cls, state: dict) -> "LofDetector":
        det = cls(k=state["k"], decision_threshold=state["decision_threshold"])
        det.train = np.asarray(state["train"], dtype=np.float64)
        det.kdist = np.asarray(state["kdist"], dtype=np.float64)
        det.lrd = np.asarray(state["lrd"], dtype=np.float64)
        return det
