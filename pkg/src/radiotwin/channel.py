"""Ground-truth propagation: log-distance path loss with spatially
correlated log-normal shadowing, and linear-domain RSS aggregation.

Path loss stays in dB, superposition happens in milliwatts. Distances are
clamped to DISTANCE_FLOOR_M so a transmitter drawn on top of a sensing unit
cannot produce an infinite gain.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateGeometryError, NotPositiveDefiniteError
from .scenario import ScenarioInstance

DISTANCE_FLOOR_M = 0.1

# jitter ladder for the Cholesky factorization, scaled by sigma^2
_JITTERS = (0.0, 1e-10, 1e-8, 1e-6)


def dbm_to_mw(p_dbm):
    return 10.0 ** (np.asarray(p_dbm, dtype=np.float64) / 10.0)


def mw_to_dbm(p_mw):
    return 10.0 * np.log10(np.asarray(p_mw, dtype=np.float64))


def path_loss_db(d, fc, alpha, l0, shadow=0.0):
    """Log-distance path loss in dB:
    10*alpha*log10(d) + 20*log10(fc) + l0 + shadow.

    Accepts scalars or arrays; d must be positive (callers apply the
    distance floor before getting here).
    """
    d = np.asarray(d, dtype=np.float64)
    if np.any(d <= 0.0):
        raise DegenerateGeometryError("path loss undefined for d <= 0")
    if fc <= 0.0:
        raise DegenerateGeometryError("carrier frequency must be positive")
    return 10.0 * alpha * np.log10(d) + 20.0 * np.log10(fc) + l0 + shadow


def covariance(points: np.ndarray, sigma: float, d_cor: float) -> np.ndarray:
    """Exponential-decay shadowing covariance over a set of positions:
    entry (k, l) = sigma^2 * exp(-d(x_k, x_l) / d_cor)."""
    points = np.asarray(points, dtype=np.float64)
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=-1))
    return sigma * sigma * np.exp(-dist / d_cor)


def cholesky_factor(cov: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L @ L.T = cov + eps*I.

    eps walks the jitter ladder (scaled by the diagonal magnitude) until the
    factorization succeeds. The all-zero matrix (sigma = 0) is valid and
    factors to zero.
    """
    cov = np.asarray(cov, dtype=np.float64)
    scale = float(np.max(np.diag(cov))) if cov.size else 0.0
    if scale == 0.0:
        if np.any(cov != 0.0):
            raise NotPositiveDefiniteError("zero diagonal with nonzero entries")
        return np.zeros_like(cov)
    eye = np.eye(cov.shape[0])
    for jitter in _JITTERS:
        try:
            return np.linalg.cholesky(cov + (jitter * scale) * eye)
        except np.linalg.LinAlgError:
            continue
    raise NotPositiveDefiniteError(
        f"covariance not positive definite after jitter up to {_JITTERS[-1] * scale}"
    )


def sample_shadowing(
    factor: np.ndarray, n_tx: int, rng: np.random.Generator
) -> np.ndarray:
    """One correlated shadowing row per transmitter, shape (n_tx, n_su).

    Each row is L @ z with i.i.d. standard normal z; rows are independent
    across transmitters.
    """
    n_su = factor.shape[0]
    z = rng.standard_normal((n_tx, n_su))
    return z @ factor.T


def _link_distances(tx_positions: np.ndarray, su_positions: np.ndarray) -> np.ndarray:
    diff = tx_positions[:, None, :] - su_positions[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=-1))
    return np.maximum(dist, DISTANCE_FLOOR_M)


def superpose_dbm(
    tx_power_dbm: np.ndarray, loss_db: np.ndarray
) -> np.ndarray:
    """Per-SU received power in dBm from per-link losses, summed in mW."""
    p_mw = 10.0 ** ((tx_power_dbm[:, None] - loss_db) / 10.0)
    return 10.0 * np.log10(p_mw.sum(axis=0))


def received_rss(scenario: ScenarioInstance, shadowing: np.ndarray) -> np.ndarray:
    """Measured RSS vector (dBm) at the sensing units.

    Shadowing rows are ordered regular transmitters first, jammer row last
    when present; the jammer contributes to the linear sum iff present.
    """
    cfg = scenario.config
    positions = scenario.tx_true
    powers = scenario.tx_power_dbm
    if scenario.has_jammer:
        positions = np.vstack([positions, scenario.jammer_pos[None, :]])
        powers = np.append(powers, scenario.jammer_power_dbm)
    if shadowing.shape != (len(positions), len(scenario.su_positions)):
        raise ValueError(
            f"shadowing shape {shadowing.shape} does not match "
            f"{len(positions)} transmitters x {len(scenario.su_positions)} SUs"
        )
    d = _link_distances(positions, scenario.su_positions)
    loss = path_loss_db(d, cfg.carrier_freq, cfg.alpha, cfg.l0) + shadowing
    return superpose_dbm(powers, loss)
