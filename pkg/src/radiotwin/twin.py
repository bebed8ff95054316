"""Digital-twin RSS prediction and the measured-minus-predicted difference.

The twin knows the regular transmitters (at their estimated positions) and
the deterministic path loss model; it never contains the jammer or the
shadowing realization.
"""

from __future__ import annotations

import numpy as np

from .channel import _link_distances, path_loss_db, superpose_dbm
from .scenario import ScenarioInstance


def expected_rss(scenario: ScenarioInstance) -> np.ndarray:
    """Twin-predicted RSS vector (dBm): regular transmitters only,
    estimated distances, zero shadowing."""
    cfg = scenario.config
    d = _link_distances(scenario.tx_est, scenario.su_positions)
    loss = path_loss_db(d, cfg.carrier_freq, cfg.alpha, cfg.l0)
    return superpose_dbm(scenario.tx_power_dbm, loss)


def delta(measured: np.ndarray, predicted: np.ndarray) -> np.ndarray:
    """Per-SU difference measured - predicted, in dB."""
    measured = np.asarray(measured, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    if measured.shape != predicted.shape:
        raise ValueError(
            f"length mismatch: measured {measured.shape} vs predicted {predicted.shape}"
        )
    return measured - predicted
