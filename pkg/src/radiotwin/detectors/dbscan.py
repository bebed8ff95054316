"""Density-reachability novelty detector built on the DBSCAN core-point
predicate.

Training clusters the normal samples once: eps is a nearest-rank quantile
of each training point's distance to its min_pts-th neighbor (counting the
point itself, as in the classic k-dist heuristic), and the points whose
neighborhood reaches min_pts members within eps are retained as core
points. A test point is normal iff it is directly density reachable from
some core point, i.e. within eps of it; the score is the distance to the
nearest core point, which makes the predicate a simple threshold at eps.

The default quantile is the 10th percentile: a deliberately tight radius
around the densest normal samples, which favors recall, the weighting the
F2 objective asks for. The 95th percentile (the classic clustering elbow)
is available as eps_mode="kdist-p95" but flags very few anomalies.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..errors import ConfigError
from .base import nearest_rank
from .neighbors import knn

EPS_FLOOR = 1e-12
EPS_PERCENTILES = {"kdist-p10": 0.10, "kdist-p95": 0.95}


class DbscanDetector:
    name = "dbscan"

    def __init__(
        self,
        min_pts: int = 5,
        eps_mode: str = "kdist-p10",
        eps: float | None = None,
    ):
        if min_pts < 1:
            raise ConfigError(f"min_pts must be >= 1, got {min_pts}")
        if eps_mode not in ("fixed", *EPS_PERCENTILES):
            raise ConfigError(f"unknown eps_mode {eps_mode!r}")
        if eps_mode == "fixed":
            if eps is None or eps <= 0.0:
                raise ConfigError("fixed eps_mode needs eps > 0")
        self.min_pts = min_pts
        self.eps_mode = eps_mode
        self.eps: float | None = eps
        self.core_points: np.ndarray | None = None

    def fit(self, train: np.ndarray) -> "DbscanDetector":
        train = np.ascontiguousarray(train, dtype=np.float64)
        if train.ndim != 2 or len(train) < self.min_pts:
            raise ConfigError(
                f"need at least min_pts={self.min_pts} training samples"
            )
        # self-inclusive k-distance: rank min_pts includes the zero
        # self-distance, so rank min_pts - 1 among the other points
        if self.min_pts == 1:
            kdist = np.zeros(len(train))
        else:
            _, dist = knn(train, train, self.min_pts - 1, exclude_self=True)
            kdist = dist[:, -1]
        if self.eps_mode in EPS_PERCENTILES:
            self.eps = max(nearest_rank(kdist, EPS_PERCENTILES[self.eps_mode]), EPS_FLOOR)
        if self.eps is None or self.eps <= 0.0:
            raise ConfigError(f"degenerate eps {self.eps}")
        # core iff >= min_pts members (self included) within eps, which is
        # exactly kdist <= eps
        self.core_points = train[kdist <= self.eps].copy()
        if len(self.core_points) == 0:
            raise ConfigError("no core points at the derived eps")
        return self

    def _check_fitted(self) -> None:
        if self.core_points is None:
            raise RuntimeError("detector not fitted")

    def score(self, x: np.ndarray) -> float:
        return float(self.score_batch(np.atleast_2d(x))[0])

    def score_batch(self, x: np.ndarray) -> np.ndarray:
        """Distance to the nearest core point."""
        self._check_fitted()
        x = np.atleast_2d(np.ascontiguousarray(x, dtype=np.float64))
        return np.sqrt(kernels.min_sq_dist(self.core_points, x))

    def predict_batch(self, x: np.ndarray) -> np.ndarray:
        """Anomaly iff not density reachable from any core point
        (boundary inclusive: distance exactly eps is normal)."""
        return self.score_batch(x) > self.eps

    def get_state(self) -> dict:
        self._check_fitted()
        return {
            "min_pts": self.min_pts,
            "eps_mode": self.eps_mode,
            "eps": self.eps,
            "core_points": self.core_points.tolist(),
        }

    @classmethod
    def from_state(cls, state: dict) -> "DbscanDetector":
        det = cls(min_pts=state["min_pts"], eps_mode="fixed", eps=state["eps"])
        det.eps_mode = state["eps_mode"]
        det.core_points = np.asarray(state["core_points"], dtype=np.float64)
        return det
