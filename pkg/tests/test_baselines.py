"""Baseline fitting contracts: duals, KKT, geometry, and hand oracles."""

import numpy as np
import pytest

from helpers import projected_gradient_qp, qp_objective
from oneclass.baselines import (BSVM, MPM, SVDD, OneClassSVM,
                                OneClassSVMPlus, load_baseline_file)
from oneclass.exceptions import (ConvergenceError, InputError, NumericalError,
                                 ParameterError, ParseError)
from oneclass.kernels import kernel_matrix, resolve_gamma, KernelSpec
from oneclass.metrics import auroc
from oneclass.numerics import RngState, gaussian_sample, solve_spd
from oneclass.occnn import OneClassCNN


def cloud(seed, n=30, d=2, mu=2.0, sigma=1.0):
    return gaussian_sample(RngState(seed), n, d, mu, sigma)


class TestKernels:
    def test_gram_symmetric_psd(self):
        for seed in range(5):
            x = cloud(seed, n=20, d=3)
            for kind in ("linear", "rbf"):
                gamma = resolve_gamma(KernelSpec(kind, None), x)
                K = kernel_matrix(kind, gamma, x)
                assert np.abs(K - K.T).max() < 1e-10
                np.linalg.cholesky(K + 1e-10 * np.eye(20))  # PSD up to jitter

    def test_default_gamma(self):
        x = cloud(0, n=50, d=4)
        assert resolve_gamma(KernelSpec("rbf", None), x) == pytest.approx(
            1.0 / (4 * x.var()))
        assert resolve_gamma(KernelSpec("rbf", 0.3), x) == 0.3

    def test_invalid_kernel(self):
        with pytest.raises(ParameterError):
            KernelSpec("poly", None)
        with pytest.raises(ParameterError):
            KernelSpec("rbf", -1.0)


class TestOneClassSVM:
    def test_nu_one_forces_uniform_alphas(self):
        x = cloud(1, n=17)
        est = OneClassSVM(nu=1.0).fit(x)
        np.testing.assert_array_equal(est.alpha_full_, np.full(17, 1.0 / 17))

    def test_margin_support_vectors_score_zero(self):
        x = cloud(2, n=40)
        est = OneClassSVM(nu=0.5).fit(x)
        margin = (est.alpha_full_ > 0) & (est.alpha_full_ < est.C_)
        assert margin.any()
        scores = est.decision_function(x[margin])
        assert np.abs(scores).max() < 1e-6

    def test_dual_matches_projected_gradient_oracle(self):
        x = cloud(3, n=20, d=2)
        est = OneClassSVM(nu=0.5, kernel="linear").fit(x)
        K = kernel_matrix("linear", None, x)
        C = 1.0 / (0.5 * 20)
        alpha = projected_gradient_qp(K, np.zeros(20), C, iters=100000)
        oracle_obj = qp_objective(K, np.zeros(20), alpha)
        assert abs(est.dual_objective_ - oracle_obj) < 1e-6

    def test_far_point_scores_minus_rho_under_rbf(self):
        x = cloud(4, n=25)
        est = OneClassSVM(nu=0.3, kernel="rbf").fit(x)
        far = np.full((1, 2), 1e4)
        assert est.decision_function(far)[0] == pytest.approx(-est.rho_, abs=1e-12)

    def test_linear_primal_reconstruction(self):
        x = cloud(5, n=30, d=3)
        est = OneClassSVM(nu=0.4, kernel="linear").fit(x)
        w = est.dual_coef_ @ est.support_vectors_
        probe = gaussian_sample(RngState(55), 10, 3, 0.0, 2.0)
        np.testing.assert_allclose(est.decision_function(probe),
                                   probe @ w - est.rho_, atol=1e-10)

    def test_nu_property_and_feasibility(self):
        rng = RngState(6)
        for trial in range(20):
            sub = rng.substream(f"t{trial}")
            n = 20 + int(sub.uniform(1)[0] * 30)
            nu = 0.1 + 0.8 * sub.uniform(1)[0]
            kind = "linear" if trial % 2 else "rbf"
            x = gaussian_sample(sub, n, 3, 1.0, 1.0)
            est = OneClassSVM(nu=nu, kernel=kind).fit(x)
            alpha = est.alpha_full_
            assert alpha.min() >= -1e-8
            assert alpha.max() <= est.C_ + 1e-8
            assert abs(alpha.sum() - 1.0) < 1e-8
            assert est.kkt_residual_ < 1e-6
            # margin vectors score exactly zero up to solver tolerance;
            # only scores clearly below zero count as outliers
            outliers = np.mean(est.train_scores_ < -1e-6)
            sv_frac = np.mean(alpha > 0)
            assert outliers <= nu + 1.0 / n
            assert sv_frac >= nu - 1.0 / n

    def test_nonconvergence_reports_residual(self):
        x = cloud(7, n=30)
        with pytest.raises(ConvergenceError) as err:
            OneClassSVM(nu=0.5, max_iter=1).fit(x)
        assert err.value.residual is not None

    def test_input_validation(self):
        with pytest.raises(InputError):
            OneClassSVM().fit(np.ones((1, 2)))
        with pytest.raises(ParameterError):
            OneClassSVM(nu=0.0).fit(np.ones((3, 2)))
        with pytest.raises(ParameterError):
            OneClassSVM(nu=1.5).fit(np.ones((3, 2)))

    def test_save_load_round_trip(self, tmp_path):
        x = cloud(8, n=20)
        est = OneClassSVM(nu=0.5).fit(x)
        p1, p2 = tmp_path / "a.ocbl", tmp_path / "b.ocbl"
        est.save(p1)
        loaded = load_baseline_file(p1)
        assert isinstance(loaded, OneClassSVM)
        loaded.save(p2)
        assert p1.read_bytes() == p2.read_bytes()
        probe = cloud(9, n=5)
        np.testing.assert_allclose(loaded.decision_function(probe),
                                   est.decision_function(probe), atol=1e-5)


class TestSVDD:
    def test_two_point_geometry(self):
        x = np.array([[-1.0], [1.0]])
        est = SVDD(C=100.0, kernel="linear").fit(x)
        np.testing.assert_allclose(est.alpha_full_, [0.5, 0.5], atol=1e-9)
        assert np.sqrt(est.r2_) == pytest.approx(1.0, abs=1e-6)
        # the center is the origin: a probe at 0 scores the full R^2
        assert est.decision_function([[0.0]])[0] == pytest.approx(est.r2_, abs=1e-9)

    def test_margin_vectors_on_sphere(self):
        x = cloud(10, n=35)
        est = SVDD(C=0.2, kernel="rbf").fit(x)
        margin = (est.alpha_full_ > 0) & (est.alpha_full_ < est.C_)
        assert margin.any()
        assert np.abs(est.decision_function(x[margin])).max() < 1e-6

    def test_duplicated_points_keep_geometry(self):
        x = cloud(11, n=15)
        a = SVDD(C=50.0, kernel="linear").fit(x)
        b = SVDD(C=50.0, kernel="linear").fit(np.vstack([x, x]))
        probe = cloud(12, n=8)
        np.testing.assert_allclose(a.decision_function(probe),
                                   b.decision_function(probe), atol=1e-6)
        assert a.r2_ == pytest.approx(b.r2_, abs=1e-6)

    def test_linear_primal_center_oracle(self):
        x = cloud(13, n=25, d=3)
        est = SVDD(C=0.3, kernel="linear").fit(x)
        center = est.dual_coef_ @ est.support_vectors_
        probe = gaussian_sample(RngState(14), 6, 3, 1.0, 2.0)
        expected = est.r2_ - np.sum((probe - center) ** 2, axis=1)
        np.testing.assert_allclose(est.decision_function(probe), expected,
                                   atol=1e-8)

    def test_dual_matches_projected_gradient_oracle(self):
        x = cloud(15, n=20, d=2)
        est = SVDD(C=0.25, kernel="rbf").fit(x)
        gamma = est.gamma_
        K = kernel_matrix("rbf", gamma, x)
        alpha = projected_gradient_qp(2.0 * K, -np.diag(K), 0.25, iters=100000)
        ours = qp_objective(2.0 * K, -np.diag(K), est.alpha_full_)
        oracle = qp_objective(2.0 * K, -np.diag(K), alpha)
        assert abs(ours - oracle) < 1e-6

    def test_feasibility_and_kkt(self):
        x = cloud(16, n=30)
        est = SVDD(C=0.2).fit(x)
        alpha = est.alpha_full_
        assert alpha.min() >= -1e-8 and alpha.max() <= 0.2 + 1e-8
        assert abs(alpha.sum() - 1.0) < 1e-8
        assert est.kkt_residual_ < 1e-6

    def test_infeasible_c_rejected(self):
        with pytest.raises(ParameterError):
            SVDD(C=0.01).fit(cloud(17, n=10))

    def test_save_load_round_trip(self, tmp_path):
        est = SVDD(C=0.3).fit(cloud(18, n=20))
        p1, p2 = tmp_path / "a.ocbl", tmp_path / "b.ocbl"
        est.save(p1)
        loaded = load_baseline_file(p1)
        assert isinstance(loaded, SVDD)
        loaded.save(p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestMPM:
    def isotropic_cloud(self, d=4, mu=3.0, s=1.5):
        # symmetric +/- pattern around the mean: sample covariance is
        # exactly isotropic and the mean is exact
        points = [mu * np.ones(d)] * 0
        for i in range(d):
            e = np.zeros(d)
            e[i] = s
            points.append(mu * np.ones(d) + e)
            points.append(mu * np.ones(d) - e)
        return np.asarray(points)

    def test_isotropic_gives_w_parallel_to_mean(self):
        x = self.isotropic_cloud()
        est = MPM(pca_dims=4, lam=1e-3).fit(x)
        z_mean = (x @ est.basis_).mean(axis=0)
        cos = (est.w_ @ z_mean) / (np.linalg.norm(est.w_) * np.linalg.norm(z_mean))
        assert cos > 1.0 - 1e-8

    def test_training_scores_mean_exactly_one(self):
        x = cloud(19, n=40, d=5)
        est = MPM(pca_dims=3).fit(x)
        assert est.train_score_mean_ == pytest.approx(1.0, abs=1e-12)

    def test_longhand_two_dimensional_oracle(self):
        rng = RngState(20)
        base = gaussian_sample(rng, 60, 2, 0.0, 1.0)
        x = base @ np.array([[2.0, 0.3], [0.0, 0.4]]) + np.array([4.0, -1.0])
        lam = 1e-3
        est = MPM(pca_dims=2, lam=lam).fit(x)

        # longhand: covariance by explicit sums, eigenbasis, then a dense
        # solve (np.linalg.solve, not the Cholesky path used by fit)
        mean = x.sum(axis=0) / len(x)
        centered = x - mean
        cov = centered.T @ centered / (len(x) - 1)
        vals, vecs = np.linalg.eigh(cov)
        basis = vecs[:, ::-1]
        anchor = np.argmax(np.abs(basis), axis=0)
        signs = np.sign(basis[anchor, np.arange(2)])
        basis = basis * signs
        z = x @ basis
        mu_z = z.mean(axis=0)
        cov_z = np.cov(z, rowvar=False)
        w0 = np.linalg.solve(cov_z + lam * np.eye(2), mu_z)
        w = w0 / (w0 @ mu_z)
        np.testing.assert_allclose(est.w_, w, atol=1e-8)

    def test_solve_spd_route_agrees_with_dense_solve(self):
        # the two linear-algebra routes (Cholesky vs LU) must agree
        x = cloud(21, n=50, d=4)
        cov = np.cov(x, rowvar=False) + 1e-3 * np.eye(4)
        mu = x.mean(axis=0)
        np.testing.assert_allclose(solve_spd(cov, mu),
                                   np.linalg.solve(cov, mu), atol=1e-8)

    def test_scaling_invariance_of_ranking(self):
        x = cloud(22, n=40, d=3)
        probe = gaussian_sample(RngState(23), 25, 3, 1.0, 2.0)
        a = MPM(pca_dims=3, lam=1e-3).fit(x).decision_function(probe)
        b = MPM(pca_dims=3, lam=9e-3).fit(3.0 * x).decision_function(3.0 * probe)
        np.testing.assert_array_equal(np.argsort(a), np.argsort(b))

    def test_mean_decision_is_one_minus_rho_plus_quantile_shift(self):
        x = cloud(24, n=30, d=4)
        est = MPM(pca_dims=2, quantile=0.05).fit(x)
        assert est.decision_function(x).mean() == pytest.approx(
            1.0 - est.rho_, abs=1e-9)

    def test_projection_consistency(self):
        x = cloud(25, n=20, d=4)
        est = MPM(pca_dims=2).fit(x)
        probe = cloud(26, n=7, d=4)
        np.testing.assert_allclose(est.decision_function(probe),
                                   (probe @ est.basis_) @ est.w_ - est.rho_,
                                   atol=1e-12)

    def test_parameter_validation(self):
        x = cloud(27, n=10, d=3)
        with pytest.raises(ParameterError):
            MPM(pca_dims=0).fit(x)
        with pytest.raises(ParameterError):
            MPM(pca_dims=4).fit(x)  # > d
        with pytest.raises(ParameterError):
            MPM(lam=0.0).fit(x)
        with pytest.raises(ParameterError):
            MPM(pca_dims=9).fit(cloud(28, n=8, d=20))  # > n-1

    def test_degenerate_mean_at_origin(self):
        x = self.isotropic_cloud(mu=0.0)
        with pytest.raises(NumericalError):
            MPM(pca_dims=4).fit(x)

    def test_save_load_round_trip(self, tmp_path):
        est = MPM(pca_dims=3).fit(cloud(29, n=25, d=5))
        p1, p2 = tmp_path / "a.ocbl", tmp_path / "b.ocbl"
        est.save(p1)
        loaded = load_baseline_file(p1)
        assert isinstance(loaded, MPM)
        loaded.save(p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestBSVM:
    def test_separable_training_accuracy(self):
        x = gaussian_sample(RngState(30), 60, 4, 5.0, 0.1)
        est = BSVM(sigma=0.01, seed=0).fit(x)
        assert est.train_accuracy_ == 1.0

    def test_objective_non_increasing_on_averaged_iterates(self):
        x = gaussian_sample(RngState(31), 50, 4, 3.0, 0.5)
        est = BSVM(sigma=0.1, seed=1).fit(x)
        path = est.objective_path_
        assert all(b <= a + 1e-9 for a, b in zip(path, path[1:]))

    def test_seeded_fit_reproducible(self):
        x = gaussian_sample(RngState(32), 40, 3, 2.0, 1.0)
        a = BSVM(seed=5).fit(x)
        b = BSVM(seed=5).fit(x)
        np.testing.assert_array_equal(a.w_, b.w_)
        assert a.b_ == b.b_

    def test_zero_model_scores_zero(self):
        est = BSVM()
        est.w_ = np.zeros(3)
        est.b_ = 0.0
        np.testing.assert_array_equal(
            est.decision_function(np.ones((4, 3))), np.zeros(4))

    def test_linearity(self):
        est = BSVM(seed=2).fit(gaussian_sample(RngState(33), 30, 3, 2.0, 0.5))
        x = np.array([[0.3, -0.7, 1.1]])
        zero = est.decision_function(np.zeros((1, 3)))[0]
        s1 = est.decision_function(x)[0]
        s2 = est.decision_function(2.0 * x)[0]
        assert s2 - zero == pytest.approx(2.0 * (s1 - zero), rel=1e-12)

    def test_hand_dot_product(self):
        est = BSVM()
        est.w_ = np.array([1.0, 2.0])
        est.b_ = 0.5
        assert est.decision_function([[3.0, 4.0]])[0] == pytest.approx(11.5)

    def test_save_load_round_trip(self, tmp_path):
        est = BSVM(seed=3).fit(gaussian_sample(RngState(34), 30, 3, 2.0, 0.5))
        p1, p2 = tmp_path / "a.ocbl", tmp_path / "b.ocbl"
        est.save(p1)
        loaded = load_baseline_file(p1)
        assert isinstance(loaded, BSVM)
        loaded.save(p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestOneClassSVMPlus:
    def test_composition_is_exact(self):
        x = gaussian_sample(RngState(35), 120, 6, 4.0, 0.5)
        cnn = OneClassCNN(epochs=5, lr=1e-2, seed=0).fit(x)
        plus = OneClassSVMPlus(cnn=cnn, nu=0.3).fit(x)
        inner = OneClassSVM(nu=0.3).fit(cnn.transform(x))
        probe = gaussian_sample(RngState(36), 10, 6, 4.0, 0.5)
        np.testing.assert_array_equal(
            plus.decision_function(probe),
            inner.decision_function(cnn.transform(probe)))

    def test_unfitted_cnn_is_cloned_and_trained(self):
        x = gaussian_sample(RngState(37), 100, 5, 3.0, 0.5)
        template = OneClassCNN(epochs=3, lr=1e-2, seed=4)
        plus = OneClassSVMPlus(cnn=template, nu=0.2).fit(x)
        assert getattr(template, "params_", None) is None  # left untouched
        assert plus.cnn_.params_ is not None

    def test_dual_feasibility_inherited(self):
        x = gaussian_sample(RngState(38), 80, 5, 3.0, 0.5)
        plus = OneClassSVMPlus(cnn=OneClassCNN(epochs=3, seed=1), nu=0.4).fit(x)
        alpha = plus.svm_.alpha_full_
        assert alpha.min() >= -1e-8
        assert abs(alpha.sum() - 1.0) < 1e-8

    def test_auroc_not_much_worse_than_raw_on_easy_task(self):
        rng = RngState(39)
        target = gaussian_sample(rng, 200, 6, 4.0, 0.4)
        other = gaussian_sample(rng, 100, 6, -1.0, 0.8)
        train, test = target[:150], target[150:]
        raw = OneClassSVM().fit(train)
        raw_auc = auroc(raw.decision_function(test),
                        raw.decision_function(other))
        plus = OneClassSVMPlus(cnn=OneClassCNN(epochs=20, lr=1e-2, seed=0)).fit(train)
        plus_auc = auroc(plus.decision_function(test),
                         plus.decision_function(other))
        assert plus_auc >= raw_auc - 0.02


class TestBaselineFileErrors:
    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.ocbl"
        path.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(ParseError, match="bad magic"):
            load_baseline_file(path)

    def test_unknown_tag(self, tmp_path):
        path = tmp_path / "tag.ocbl"
        path.write_bytes(b"OCBL" + (1).to_bytes(2, "little") + bytes([250]))
        with pytest.raises(ParseError, match="method tag"):
            load_baseline_file(path)

    def test_truncation(self, tmp_path):
        est = BSVM(seed=3).fit(gaussian_sample(RngState(40), 20, 3, 2.0, 0.5))
        path = tmp_path / "t.ocbl"
        est.save(path)
        blob = path.read_bytes()
        path.write_bytes(blob[:-4])
        with pytest.raises(ParseError, match="truncated"):
            load_baseline_file(path)
