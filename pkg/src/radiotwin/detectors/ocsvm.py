"""One-class SVM with an RBF kernel, solved by a pairwise SMO solver.

The dual

    min  0.5 * sum_ij a_i a_j k(x_i, x_j)
    s.t. 0 <= a_i <= 1/(nu*n),  sum_i a_i = 1

is solved by most-violating-pair coordinate steps on a precomputed Gram
matrix (memory is 8*n^2 bytes; the desk-scale default of 4000 training
samples needs 128 MB). Scores are oriented so that larger means more
anomalous: score(x) = rho - sum_i a_i k(x_i, x), anomaly iff score > 0.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..errors import ConfigError, SolverNonConvergence


# decision values are kernel sums over up to n support vectors; membership
# at the hypersphere boundary is only meaningful above the accumulated
# rounding noise of those sums
BOUNDARY_ATOL = 1e-9


def rbf_gamma_scale(train: np.ndarray) -> float:
    """'scale' bandwidth: 1 / (n_features * total feature variance)."""
    var = float(np.asarray(train, dtype=np.float64).var())
    if var <= 0.0:
        return 1.0
    return 1.0 / (train.shape[1] * var)


def _rbf(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    k = kernels.pairwise_sq_dists(
        np.ascontiguousarray(a, dtype=np.float64),
        np.ascontiguousarray(b, dtype=np.float64),
    )
    k *= -gamma
    np.exp(k, out=k)
    return k


class OcsvmDetector:
    name = "ocsvm"

    def __init__(
        self,
        nu: float = 0.5,
        gamma: float | str = "scale",
        tol: float = 1e-3,
        max_iter: int = 1_000_000,
    ):
        if not 0.0 < nu <= 1.0:
            raise ConfigError(f"nu must be in (0, 1], got {nu}")
        self.nu = nu
        self.gamma = gamma
        self.tol = tol
        self.max_iter = max_iter
        self.gamma_value: float | None = None
        self.support_vectors: np.ndarray | None = None
        self.dual_coef: np.ndarray | None = None
        self.rho: float | None = None
        self.kkt_residual: float | None = None
        self.iterations: int | None = None

    def fit(self, train: np.ndarray) -> "OcsvmDetector":
        train = np.ascontiguousarray(train, dtype=np.float64)
        n = len(train)
        if train.ndim != 2 or n < 2:
            raise ConfigError("need at least 2 training samples")
        self.gamma_value = (
            rbf_gamma_scale(train) if self.gamma == "scale" else float(self.gamma)
        )
        gram = _rbf(train, train, self.gamma_value)
        box = 1.0 / (self.nu * n)
        alpha, rho, iters, gap = kernels.smo_one_class(
            gram, box, self.tol, self.max_iter
        )
        if gap > self.tol:
            raise SolverNonConvergence(
                f"SMO stopped at {iters} iterations with KKT gap {gap:.3e} "
                f"(tolerance {self.tol:.1e})",
                residual=float(gap),
                iterations=int(iters),
            )
        sv = alpha > 0.0
        self.support_vectors = train[sv].copy()
        self.dual_coef = alpha[sv].copy()
        self.kkt_residual = float(gap)
        self.iterations = int(iters)
        # rho through the same kernel path scoring uses, so boundary points
        # land at score exactly 0 (the solver-internal gradient can differ
        # from recomputed decision values by an ulp); exact ties snap
        free = (alpha > 0.0) & (alpha < box)
        if free.any():
            dec = self.decision_values(train[free])
            self.rho = float(dec[0]) if np.all(dec == dec[0]) else float(dec.mean())
        else:
            dec = self.decision_values(train)
            lower = float(dec[alpha >= box].max()) if (alpha >= box).any() else -np.inf
            upper = float(dec[alpha <= 0.0].min()) if (alpha <= 0.0).any() else np.inf
            if lower == upper:
                self.rho = lower
            elif not np.isfinite(lower):
                self.rho = upper if np.isfinite(upper) else float(rho)
            elif not np.isfinite(upper):
                self.rho = lower
            else:
                self.rho = 0.5 * (lower + upper)
        return self

    def _check_fitted(self) -> None:
        if self.support_vectors is None:
            raise RuntimeError("detector not fitted")

    def decision_values(self, x: np.ndarray) -> np.ndarray:
        """sum_i a_i k(sv_i, x) for each row of x."""
        self._check_fitted()
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return _rbf(x, self.support_vectors, self.gamma_value) @ self.dual_coef

    def score(self, x: np.ndarray) -> float:
        return float(self.score_batch(np.atleast_2d(x))[0])

    def score_batch(self, x: np.ndarray) -> np.ndarray:
        return self.rho - self.decision_values(x)

    def predict_batch(self, x: np.ndarray) -> np.ndarray:
        """Anomaly iff the point falls strictly outside the hypersphere
        (boundary membership resolved up to summation noise)."""
        return self.score_batch(x) > BOUNDARY_ATOL

    @property
    def n_support(self) -> int:
        self._check_fitted()
        return len(self.support_vectors)

    def get_state(self) -> dict:
        self._check_fitted()
        return {
            "nu": self.nu,
            "gamma_value": self.gamma_value,
            "rho": self.rho,
            "kkt_residual": self.kkt_residual,
            "iterations": self.iterations,
            "support_vectors": self.support_vectors.tolist(),
            "dual_coef": self.dual_coef.tolist(),
        }

    @classmethod
    def from_state(cls, state: dict) -> "OcsvmDetector":
        det = cls(nu=state["nu"])
        det.gamma_value = float(state["gamma_value"])
        det.rho = float(state["rho"])
        det.kkt_residual = float(state["kkt_residual"])
        det.iterations = int(state["iterations"])
        det.support_vectors = np.asarray(state["support_vectors"], dtype=np.float64)
        det.dual_coef = np.asarray(state["dual_coef"], dtype=np.float64)
        return det
