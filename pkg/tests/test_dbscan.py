import numpy as np
import pytest

from radiotwin.detectors import DbscanDetector, load_model, save_model
from radiotwin.errors import ConfigError


def two_blobs(n=60, separation=50.0, spread=0.5, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(scale=spread, size=(n, 2))
    b = rng.normal(scale=spread, size=(n, 2)) + separation
    return np.vstack([a, b])


def oracle_predict(train_cores, eps, x):
    """Literal reachability check: anomaly iff no core point within eps."""
    out = []
    for q in np.atleast_2d(x):
        dists = np.sqrt(((train_cores - q) ** 2).sum(axis=1))
        out.append(not np.any(dists <= eps))
    return np.array(out)


class TestFit:
    def test_identical_points_floor_eps_single_core_cloud(self):
        x = np.tile([2.0, -1.0], (30, 1))
        det = DbscanDetector(min_pts=5).fit(x)
        assert det.eps == pytest.approx(1e-12)
        assert len(det.core_points) == 30
        assert not det.predict_batch(x[:1])[0]
        assert det.predict_batch(np.array([[2.1, -1.0]]))[0]

    def test_two_blobs_default_rule(self):
        x = two_blobs()
        det = DbscanDetector(min_pts=5).fit(x)
        # the tight default radius keeps only the densest samples as cores,
        # drawn from both blobs; the gap between blobs stays anomalous
        assert len(det.core_points) > 0
        assert (det.core_points[:, 0] < 25.0).any()
        assert (det.core_points[:, 0] > 25.0).any()
        assert det.predict_batch(np.array([[25.0, 25.0]]))[0]

    def test_two_blobs_p95_members_become_core(self):
        x = two_blobs()
        det = DbscanDetector(min_pts=5, eps_mode="kdist-p95").fit(x)
        # the clustering elbow radius makes essentially all members of both
        # blobs core points and reachable
        assert len(det.core_points) >= 0.9 * len(x)
        assert det.predict_batch(x).mean() < 0.1
        assert det.predict_batch(np.array([[25.0, 25.0]]))[0]

    def test_every_core_point_has_min_pts_neighbors(self):
        x = two_blobs(seed=3)
        det = DbscanDetector(min_pts=5).fit(x)
        for core in det.core_points:
            within = np.sqrt(((x - core) ** 2).sum(axis=1)) <= det.eps
            assert within.sum() >= det.min_pts  # self included

    def test_deterministic(self):
        x = two_blobs(seed=4)
        a = DbscanDetector().fit(x)
        b = DbscanDetector().fit(x)
        assert a.eps == b.eps
        assert np.array_equal(a.core_points, b.core_points)

    def test_too_few_samples(self):
        with pytest.raises(ConfigError):
            DbscanDetector(min_pts=5).fit(np.zeros((4, 2)))

    def test_fixed_eps_mode_validation(self):
        with pytest.raises(ConfigError):
            DbscanDetector(eps_mode="fixed")
        with pytest.raises(ConfigError):
            DbscanDetector(eps_mode="quantile-q")

    def test_p95_mode_available(self):
        x = two_blobs(seed=5)
        det10 = DbscanDetector(eps_mode="kdist-p10").fit(x)
        det95 = DbscanDetector(eps_mode="kdist-p95").fit(x)
        assert det95.eps > det10.eps
        assert len(det95.core_points) > len(det10.core_points)


class TestScore:
    def test_core_point_scores_zero(self):
        x = two_blobs(seed=6)
        det = DbscanDetector().fit(x)
        assert det.score(det.core_points[0]) == 0.0
        assert not det.predict_batch(det.core_points[:1])[0]

    def test_boundary_eps_inclusive(self):
        det = DbscanDetector(min_pts=1, eps_mode="fixed", eps=1.0).fit(
            np.zeros((3, 2))
        )
        at_eps = np.array([[1.0, 0.0]])
        beyond = np.array([[1.0 + 1e-9, 0.0]])
        assert det.score(at_eps[0]) == 1.0
        assert not det.predict_batch(at_eps)[0]
        assert det.predict_batch(beyond)[0]

    def test_predict_equals_brute_force_reachability(self):
        x = two_blobs(seed=7)
        det = DbscanDetector().fit(x)
        rng = np.random.default_rng(8)
        probes = rng.uniform(-10, 60, size=(200, 2))
        assert np.array_equal(
            det.predict_batch(probes), oracle_predict(det.core_points, det.eps, probes)
        )

    def test_score_is_lipschitz(self):
        x = two_blobs(seed=9)
        det = DbscanDetector().fit(x)
        rng = np.random.default_rng(10)
        a = rng.uniform(-10, 60, size=(100, 2))
        b = a + rng.normal(scale=2.0, size=a.shape)
        gap = np.abs(det.score_batch(a) - det.score_batch(b))
        step = np.sqrt(((a - b) ** 2).sum(axis=1))
        assert np.all(gap <= step + 1e-9)


def test_serialization_round_trip(tmp_path):
    det = DbscanDetector().fit(two_blobs(seed=11))
    path = str(tmp_path / "dbscan.json")
    save_model(det, path)
    loaded = load_model(path)
    rng = np.random.default_rng(12)
    probes = rng.uniform(-10, 60, size=(50, 2))
    assert np.array_equal(loaded.score_batch(probes), det.score_batch(probes))
    assert loaded.eps == det.eps
