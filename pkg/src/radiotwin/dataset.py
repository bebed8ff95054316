"""Labeled difference-vector datasets: generation, sorting, CSV persistence.

A dataset is generated sample by sample, each from its own random substream
derived from (master_seed, phase, index), so the result is identical no
matter how generation is scheduled. Files always hold unsorted features;
the descending-sort preprocessing is applied by the matrix accessors when
the sorted_features flag is on, so one file on disk serves both modes.

On disk a dataset named ``runs/foo`` (or ``runs/foo.csv``) is the triple
``runs/foo.train.csv``, ``runs/foo.test.csv``, ``runs/foo.meta``; each CSV
has the header ``label,delta_0,...,delta_{N-1}`` with label 1 = anomaly.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import twin
from .channel import cholesky_factor, covariance, received_rss, sample_shadowing
from .errors import ConfigError, DataFormatError
from .scenario import (
    GENERATOR_VERSION,
    ScenarioConfig,
    build_su_grid,
    config_from_kv,
    config_to_kv,
    sample_rng,
    sample_scenario,
)

PHASE_TRAIN = 0
PHASE_TEST = 1

LABEL_NORMAL = 0
LABEL_ANOMALY = 1


@dataclass(frozen=True)
class DeltaSample:
    features: np.ndarray  # (n_su,) dB
    label: int  # 0 normal, 1 anomaly


def sort_descending(sample: DeltaSample) -> DeltaSample:
    """Features permuted into non-increasing order; label unchanged."""
    return DeltaSample(np.sort(sample.features)[::-1].copy(), sample.label)


def _sorted_desc(x: np.ndarray) -> np.ndarray:
    return np.sort(x, axis=1)[:, ::-1].copy()


@dataclass
class Dataset:
    """Train split (all normal) and labeled test split of one scenario.

    Features are stored unsorted; train_matrix()/test_matrix() apply the
    descending sort when sorted_features is set.
    """

    train_features: np.ndarray  # (n_train, n_su)
    test_features: np.ndarray  # (n_test, n_su)
    test_labels: np.ndarray  # (n_test,) int
    config: ScenarioConfig
    sorted_features: bool = False

    @property
    def n_train(self) -> int:
        return len(self.train_features)

    @property
    def n_test(self) -> int:
        return len(self.test_features)

    def train_matrix(self) -> np.ndarray:
        if self.sorted_features:
            return _sorted_desc(self.train_features)
        return self.train_features

    def test_matrix(self) -> np.ndarray:
        if self.sorted_features:
            return _sorted_desc(self.test_features)
        return self.test_features

    def with_sorting(self, sorted_features: bool) -> "Dataset":
        """Same underlying samples, different preprocessing flag."""
        return Dataset(
            self.train_features,
            self.test_features,
            self.test_labels,
            self.config,
            sorted_features,
        )


def anomaly_plan(n_test: int, anomaly_fraction: float) -> np.ndarray:
    """Deterministic test labels: floor(anomaly_fraction * n_test) anomalies
    interleaved evenly by sample index (integer Bresenham scheme)."""
    if not 0.0 <= anomaly_fraction <= 1.0:
        raise ConfigError(f"anomaly_fraction must be in [0, 1], got {anomaly_fraction}")
    n_anom = int(np.floor(anomaly_fraction * n_test + 1e-9))
    idx = np.arange(n_test, dtype=np.int64)
    labels = ((idx + 1) * n_anom) // n_test - (idx * n_anom) // n_test
    return labels.astype(np.int64)


def _one_delta(
    config: ScenarioConfig, factor: np.ndarray, phase: int, index: int, anomalous: bool
) -> np.ndarray:
    rng = sample_rng(config.master_seed, phase, index)
    scenario = sample_scenario(config, anomalous, rng)
    shadow = sample_shadowing(factor, scenario.n_transmitters, rng)
    measured = received_rss(scenario, shadow)
    predicted = twin.expected_rss(scenario)
    return twin.delta(measured, predicted)


def generate(
    config: ScenarioConfig,
    n_train: int,
    n_test: int,
    anomaly_fraction: float = 0.5,
    sorted_features: bool = False,
) -> Dataset:
    """Simulate a full train/test dataset under the given configuration."""
    config.validate()
    if n_train < 1 or n_test < 1:
        raise ConfigError("n_train and n_test must be >= 1")
    su = build_su_grid(config.area_side, config.grid_size)
    factor = cholesky_factor(covariance(su, config.sigma_shadow, config.d_cor))

    train = np.empty((n_train, len(su)), dtype=np.float64)
    for i in range(n_train):
        train[i] = _one_delta(config, factor, PHASE_TRAIN, i, anomalous=False)

    labels = anomaly_plan(n_test, anomaly_fraction)
    test = np.empty((n_test, len(su)), dtype=np.float64)
    for i in range(n_test):
        test[i] = _one_delta(config, factor, PHASE_TEST, i, anomalous=bool(labels[i]))

    return Dataset(train, test, labels, config, sorted_features)


# ---------------------------------------------------------------------------
# CSV persistence


def _format_row(label: int, features: np.ndarray) -> str:
    return ",".join([str(int(label))] + [repr(float(v)) for v in features])


def save_samples_csv(path: str, features: np.ndarray, labels: np.ndarray) -> None:
    """Write one flat sample file: label,delta_0,...,delta_{N-1}."""
    n_feat = features.shape[1]
    header = ",".join(["label"] + [f"delta_{j}" for j in range(n_feat)])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for label, row in zip(labels, features):
            fh.write(_format_row(label, row) + "\n")


def load_samples_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Read one flat sample file; returns (features, labels).

    Raises DataFormatError naming the offending line for short/long rows,
    bad label tokens, unparsable floats, or a missing header.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise DataFormatError(f"{path}: empty file (missing header)")
    header = lines[0].split(",")
    if header[0] != "label" or any(
        col != f"delta_{j}" for j, col in enumerate(header[1:])
    ):
        raise DataFormatError(f"{path}: line 1: malformed header")
    n_feat = len(header) - 1
    if n_feat < 1:
        raise DataFormatError(f"{path}: line 1: header has no feature columns")

    features = np.empty((len(lines) - 1, n_feat), dtype=np.float64)
    labels = np.empty(len(lines) - 1, dtype=np.int64)
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != n_feat + 1:
            raise DataFormatError(
                f"{path}: line {i}: expected {n_feat + 1} columns, got {len(parts)}"
            )
        if parts[0] not in ("0", "1"):
            raise DataFormatError(f"{path}: line {i}: bad label token {parts[0]!r}")
        labels[i - 2] = int(parts[0])
        try:
            features[i - 2] = [float(v) for v in parts[1:]]
        except ValueError as exc:
            raise DataFormatError(f"{path}: line {i}: bad float value") from exc
    return features, labels


def dataset_paths(path: str) -> tuple[str, str, str]:
    """Map a dataset name to its (train csv, test csv, meta) file paths."""
    base = path[:-4] if path.endswith(".csv") else path
    return f"{base}.train.csv", f"{base}.test.csv", f"{base}.meta"


def save_csv(dataset: Dataset, path: str) -> tuple[str, str, str]:
    """Persist a dataset under the given basename; features go to disk
    unsorted regardless of the sorting flag (which lands in the metadata)."""
    train_path, test_path, meta_path = dataset_paths(path)
    parent = os.path.dirname(train_path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    save_samples_csv(
        train_path,
        dataset.train_features,
        np.zeros(dataset.n_train, dtype=np.int64),
    )
    save_samples_csv(test_path, dataset.test_features, dataset.test_labels)
    with open(meta_path, "w", encoding="utf-8") as fh:
        fh.write("format=radiotwin-dataset\n")
        fh.write("version=1\n")
        fh.write(f"generator_version={GENERATOR_VERSION}\n")
        fh.write(f"sorted_features={int(dataset.sorted_features)}\n")
        fh.write(config_to_kv(dataset.config))
    return train_path, test_path, meta_path


def load_csv(path: str) -> Dataset:
    """Load a dataset previously written by save_csv."""
    train_path, test_path, meta_path = dataset_paths(path)
    try:
        with open(meta_path, "r", encoding="utf-8") as fh:
            meta_text = fh.read()
    except OSError as exc:
        raise DataFormatError(f"cannot read {meta_path}: {exc}") from exc

    meta: dict[str, str] = {}
    config_lines: list[str] = []
    for raw in meta_text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        if key in ("format", "version", "generator_version", "sorted_features"):
            meta[key] = value
        else:
            config_lines.append(line)
    if meta.get("format") != "radiotwin-dataset":
        raise DataFormatError(f"{meta_path}: not a radiotwin dataset metadata file")
    config = config_from_kv("\n".join(config_lines))

    train_features, train_labels = load_samples_csv(train_path)
    if np.any(train_labels != LABEL_NORMAL):
        raise DataFormatError(f"{train_path}: training split contains anomaly labels")
    test_features, test_labels = load_samples_csv(test_path)
    if train_features.shape[1] != test_features.shape[1]:
        raise DataFormatError(
            f"{path}: train/test feature width mismatch "
            f"({train_features.shape[1]} vs {test_features.shape[1]})"
        )
    return Dataset(
        train_features,
        test_features,
        test_labels,
        config,
        sorted_features=meta.get("sorted_features", "0") == "1",
    )
