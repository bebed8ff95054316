"""Shared detector plumbing: rank statistics and model (de)serialization.

Every detector is fit on normal samples only and exposes score_batch with a
common orientation (higher = more anomalous) plus predict_batch applying
its own default decision rule. Models serialize to a versioned JSON file;
floats survive the round trip exactly, so reloaded models reproduce scores
bit for bit.
"""

from __future__ import annotations

import json
import math
import os

import numpy as np

from ..errors import DataFormatError

MODEL_FORMAT = "radiotwin-model"
MODEL_VERSION = 1


def nearest_rank(values: np.ndarray, fraction: float) -> float:
    """Nearest-rank percentile: the ceil(fraction * n)-th smallest value
    (1-based). The tiny slack keeps exact products like 0.7*10 from being
    pushed one rank up by float rounding."""
    values = np.sort(np.asarray(values, dtype=np.float64))
    n = len(values)
    if n == 0:
        raise ValueError("nearest_rank of empty values")
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    rank = math.ceil(fraction * n - 1e-9)
    return float(values[max(rank, 1) - 1])


def row_mean(x: np.ndarray) -> float:
    """Permutation-invariant mean: exactly rounded sum, so feature order
    (sorted or not) can never change the result."""
    x = np.asarray(x, dtype=np.float64)
    return math.fsum(x.tolist()) / len(x)


def save_model(detector, path: str) -> None:
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "detector": detector.name,
        "state": detector.get_state(),
    }
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_model(path: str):
    from . import DETECTORS  # late import: registry lives in the package root

    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise DataFormatError(f"cannot read model {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise DataFormatError(f"{path}: not a radiotwin model file")
    if payload.get("version") != MODEL_VERSION:
        raise DataFormatError(
            f"{path}: unsupported model version {payload.get('version')}"
        )
    kind = payload.get("detector")
    if kind not in DETECTORS:
        raise DataFormatError(f"{path}: unknown detector kind {kind!r}")
    try:
        return DETECTORS[kind].from_state(payload["state"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"{path}: malformed model state: {exc}") from exc
