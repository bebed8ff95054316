import numpy as np
import pytest

from radiotwin.detectors import OcsvmDetector, load_model, save_model
from radiotwin.detectors.ocsvm import rbf_gamma_scale
from radiotwin.errors import ConfigError, SolverNonConvergence
from radiotwin.kernels import _python as pyk


def qp_oracle(gram, nu):
    """Independent dual solution via cvxopt's interior-point QP."""
    from cvxopt import matrix, solvers

    n = len(gram)
    box = 1.0 / (nu * n)
    p = matrix(gram)
    q = matrix(np.zeros(n))
    g = matrix(np.vstack([-np.eye(n), np.eye(n)]))
    h = matrix(np.concatenate([np.zeros(n), np.full(n, box)]))
    a = matrix(np.ones((1, n)))
    b = matrix(np.ones(1))
    solvers.options["show_progress"] = False
    sol = solvers.qp(p, q, g, h, a, b)
    alpha = np.asarray(sol["x"]).ravel()
    # cvxopt's Lagrangian adds +y*(Ax - b), so the margin offset is -y
    rho = -float(sol["y"][0])
    return alpha, rho


class TestGamma:
    def test_scale_definition(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(100, 7))
        assert rbf_gamma_scale(x) == 1.0 / (7 * x.var())

    def test_constant_data_guard(self):
        assert rbf_gamma_scale(np.ones((10, 4))) == 1.0


class TestFit:
    def test_identical_points_score_zero(self):
        x = np.tile([1.5, -2.0, 0.5], (20, 1))
        det = OcsvmDetector(nu=0.5).fit(x)
        assert det.score(x[0]) == pytest.approx(0.0, abs=1e-9)
        assert not det.predict_batch(x[:1])[0]

    def test_nu_property(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(1000, 4))
        det = OcsvmDetector(nu=0.5).fit(x)
        outlier_fraction = det.predict_batch(x).mean()
        assert 0.4 <= outlier_fraction <= 0.6
        assert det.n_support / len(x) >= 0.5 - 0.05

    def test_dual_constraints_tight(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(400, 6))
        det = OcsvmDetector(nu=0.3).fit(x)
        box = 1.0 / (0.3 * len(x))
        assert abs(det.dual_coef.sum() - 1.0) <= 1e-9
        assert det.dual_coef.min() > 0.0
        assert det.dual_coef.max() <= box + 1e-9
        assert det.kkt_residual <= det.tol

    def test_margin_sv_scores_near_zero(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(500, 5))
        det = OcsvmDetector(nu=0.5, tol=1e-4).fit(x)
        box = 1.0 / (0.5 * len(x))
        free = (det.dual_coef > 1e-12) & (det.dual_coef < box - 1e-12)
        assert free.any()
        margin_scores = det.score_batch(det.support_vectors[free])
        assert np.abs(margin_scores).max() <= 2e-4

    def test_far_point_score_approaches_rho(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(200, 3))
        det = OcsvmDetector().fit(x)
        far = np.full((1, 3), 1e6)
        assert det.score_batch(far)[0] == pytest.approx(det.rho, abs=1e-12)
        assert det.predict_batch(far)[0]

    def test_matches_qp_oracle(self):
        pytest.importorskip("cvxopt")
        rng = np.random.default_rng(5)
        x = rng.normal(size=(120, 4))
        nu = 0.4
        det = OcsvmDetector(nu=nu, tol=1e-5).fit(x)
        gram = np.exp(-det.gamma_value * pyk.pairwise_sq_dists(x, x))
        alpha_ref, rho_ref = qp_oracle(gram, nu)
        # reconstruct the full alpha vector through the stored SVs, which
        # keep training order
        alpha = np.zeros(len(x))
        k = 0
        for i in range(len(x)):
            if k < det.n_support and np.array_equal(x[i], det.support_vectors[k]):
                alpha[i] = det.dual_coef[k]
                k += 1
        assert k == det.n_support
        obj = 0.5 * alpha @ gram @ alpha
        obj_ref = 0.5 * alpha_ref @ gram @ alpha_ref
        assert obj == pytest.approx(obj_ref, abs=1e-6)
        assert det.rho == pytest.approx(rho_ref, abs=1e-3)

    def test_non_convergence_reports_residual(self):
        rng = np.random.default_rng(6)
        x = rng.normal(size=(100, 3))
        with pytest.raises(SolverNonConvergence) as err:
            OcsvmDetector(max_iter=1).fit(x)
        assert err.value.residual > 0
        assert err.value.iterations == 1

    def test_too_few_samples(self):
        with pytest.raises(ConfigError):
            OcsvmDetector().fit(np.zeros((1, 3)))

    def test_bad_nu(self):
        with pytest.raises(ConfigError):
            OcsvmDetector(nu=0.0)


class TestScoreShift:
    def test_offset_sweep_traces_the_roc(self):
        # shifting the decision threshold is the same as sweeping the score
        # cutoff, which is what the ROC machinery does
        rng = np.random.default_rng(7)
        x = rng.normal(size=(300, 4))
        det = OcsvmDetector().fit(x)
        test = rng.normal(size=(100, 4))
        scores = det.score_batch(test)
        for offset in (-0.5, 0.0, 0.5):
            preds = scores > offset
            assert np.array_equal(preds, (scores - offset) > 0)


def test_serialization_round_trip(tmp_path):
    rng = np.random.default_rng(8)
    det = OcsvmDetector(nu=0.5).fit(rng.normal(size=(150, 5)))
    path = str(tmp_path / "ocsvm.json")
    save_model(det, path)
    loaded = load_model(path)
    x = rng.normal(size=(50, 5))
    assert np.array_equal(loaded.score_batch(x), det.score_batch(x))
    assert loaded.rho == det.rho
