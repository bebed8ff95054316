"""Novelty detectors over difference vectors, one common contract:

fit(train) on normal samples only, score_batch(x) with higher = more
anomalous, predict_batch(x) applying the detector's default decision rule.
"""

from .aed import AedDetector
from .base import load_model, save_model
from .dbscan import DbscanDetector
from .lof import LofDetector
from .ocsvm import OcsvmDetector

DETECTORS = {
    AedDetector.name: AedDetector,
    OcsvmDetector.name: OcsvmDetector,
    LofDetector.name: LofDetector,
    DbscanDetector.name: DbscanDetector,
}


def make_detector(name: str, **kwargs):
    if name not in DETECTORS:
        raise KeyError(f"unknown detector {name!r}; choose from {sorted(DETECTORS)}")
    return DETECTORS[name](**kwargs)


__all__ = [
    "AedDetector",
    "OcsvmDetector",
    "LofDetector",
    "DbscanDetector",
    "DETECTORS",
    "make_detector",
    "save_model",
    "load_model",
]
