import numpy as np
import pytest

from radiotwin.detectors import LofDetector, load_model, save_model
from radiotwin.errors import ConfigError


def uniform_grid_2d(side=15, spacing=1.0):
    xs, ys = np.meshgrid(np.arange(side) * spacing, np.arange(side) * spacing)
    return np.column_stack([xs.ravel(), ys.ravel()]).astype(float)


class TestHomogeneity:
    def test_interior_grid_points_near_one(self):
        grid = uniform_grid_2d()
        det = LofDetector(k=8).fit(grid)
        interior = grid[
            (grid[:, 0] >= 3) & (grid[:, 0] <= 11) & (grid[:, 1] >= 3) & (grid[:, 1] <= 11)
        ]
        scores = det.score_batch(interior)
        assert np.all(scores >= 0.9) and np.all(scores <= 1.1)

    def test_isolated_point_scores_high(self):
        grid = uniform_grid_2d()
        det = LofDetector(k=8).fit(grid)
        assert det.score(np.array([200.0, 200.0])) > 2.0

    def test_dense_cluster_member_near_one(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(500, 3))
        det = LofDetector(k=20).fit(x)
        assert det.score_batch(x[:50]).mean() == pytest.approx(1.0, abs=0.15)


class TestDegenerate:
    def test_duplicates_beyond_k_are_floored(self):
        x = np.vstack([np.zeros((30, 2)), np.ones((10, 2))])
        det = LofDetector(k=5).fit(x)
        score = det.score(np.zeros(2))
        assert np.isfinite(score)
        assert score == pytest.approx(1.0, abs=1e-9)

    def test_k_too_large(self):
        with pytest.raises(ConfigError):
            LofDetector(k=10).fit(np.zeros((10, 2)))

    def test_k_equals_n_minus_one_median(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(200, 4))
        det = LofDetector(k=199).fit(x)
        assert 0.8 <= np.median(det.score_batch(x)) <= 1.3


class TestMonotonicity:
    def test_radial_scores_never_decrease_outside_cluster(self):
        # compact cluster of radius ~0.3; the ray starts clear of the bulk
        rng = np.random.default_rng(2)
        cluster = rng.normal(scale=0.3, size=(500, 2))
        det = LofDetector(k=20).fit(cluster)
        radii = np.linspace(1.0, 10.0, 20)
        points = np.column_stack([radii, np.zeros_like(radii)])
        scores = det.score_batch(points)
        assert np.all(np.diff(scores) >= -1e-9)


class TestDecisionRule:
    def test_threshold_strictly_exceeded(self):
        grid = uniform_grid_2d()
        det = LofDetector(k=8, decision_threshold=1.5).fit(grid)
        inlier = grid[112]  # center
        outlier = np.array([100.0, 100.0])
        preds = det.predict_batch(np.vstack([inlier, outlier]))
        assert preds.tolist() == [False, True]


def test_serialization_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    det = LofDetector(k=15).fit(rng.normal(size=(300, 6)))
    path = str(tmp_path / "lof.json")
    save_model(det, path)
    loaded = load_model(path)
    x = rng.normal(size=(40, 6))
    assert np.array_equal(loaded.score_batch(x), det.score_batch(x))
