"""Classical one-class baselines: OC-SVM, SVDD, MPM, BSVM, and OC-SVM+.

OC-SVM and SVDD share one SMO-style dual solver over the standard
box-and-simplex feasible set {0 <= alpha <= C, sum(alpha) = 1}; MPM is the
second-order-statistics hyperplane w = (Cov + lam*I)^-1 * mean computed in
a PCA subspace; BSVM is a linear soft-margin SVM trained against Gaussian
pseudo-negatives by deterministic full-batch subgradient descent.

All scores follow the convention: higher = more target-like.
"""

import numpy as np

from .base import BaseEstimator
from .exceptions import (ConvergenceError, InputError, NumericalError,
                         ParameterError, ParseError)
from .kernels import KernelSpec, kernel_diag, kernel_matrix, resolve_gamma
from .numerics import RngState, gaussian_sample, solve_spd
from .occnn import OneClassCNN
from .serialize import (BASELINE_MAGIC, FORMAT_VERSION, ByteReader,
                        ByteWriter)
from .validation import as_matrix, check_fitted

_TAG_OCSVM = 1
_TAG_SVDD = 2
_TAG_MPM = 3
_TAG_BSVM = 4

_KERNEL_CODES = {"linear": 0, "rbf": 1}
_KERNEL_NAMES = {v: k for k, v in _KERNEL_CODES.items()}


def _smo_minimize(Q, lin, C, tol, max_iter):
    """Minimize 1/2 a'Qa + lin'a over {0 <= a <= C, sum(a) = 1}.

    Maximal-violating-pair updates: KKT holds when max gradient over
    {a_i > 0} minus min gradient over {a_i < C} drops below tol.  Bound
    hits are assigned exactly, so set membership is exact comparison.
    Returns (alpha, gradient, final violation).
    """
    n = Q.shape[0]
    alpha = np.full(n, 1.0 / n)
    if C < alpha[0]:
        raise ParameterError(f"box C={C} is infeasible with n={n} (need C >= 1/n)")
    grad = Q @ alpha + lin

    violation = np.inf
    for _ in range(max_iter):
        lower = alpha > 0.0   # mass can leave
        upper = alpha < C     # mass can enter
        if not lower.any() or not upper.any():
            return alpha, grad, -np.inf
        v = np.flatnonzero(lower)[np.argmax(grad[lower])]
        u = np.flatnonzero(upper)[np.argmin(grad[upper])]
        violation = grad[v] - grad[u]
        if violation < tol or u == v:
            return alpha, grad, violation

        cap_u = C - alpha[u]
        cap_v = alpha[v]
        step_cap = min(cap_u, cap_v)
        quad = Q[u, u] + Q[v, v] - 2.0 * Q[u, v]
        delta = min(violation / quad, step_cap) if quad > 1e-300 else step_cap
        alpha[u] = C if delta == cap_u else alpha[u] + delta
        alpha[v] = 0.0 if delta == cap_v else alpha[v] - delta
        grad += delta * (Q[:, u] - Q[:, v])

    raise ConvergenceError(
        f"SMO did not reach tolerance {tol} within {max_iter} updates "
        f"(violation {violation:.3e})", residual=violation)


def _offset_from_margin(grad, alpha, C):
    """KKT offset: mean gradient over margin vectors, else the midpoint of
    the feasible interval [max grad over alpha>0, min grad over alpha<C]."""
    margin = (alpha > 0.0) & (alpha < C)
    if margin.any():
        return float(np.mean(grad[margin]))
    lo = float(np.max(grad[alpha > 0.0])) if (alpha > 0.0).any() else None
    hi = float(np.min(grad[alpha < C])) if (alpha < C).any() else None
    if lo is not None and hi is not None:
        return 0.5 * (lo + hi)
    return lo if lo is not None else hi


class OneClassSVM(BaseEstimator):
    """nu-parameterized one-class SVM separating data from the origin.

    Dual: minimize 1/2 a'Ka subject to 0 <= a_i <= 1/(nu*n), sum(a) = 1.
    decision_function(x) = sum_i a_i k(x_i, x) - rho, zero at the margin.
    """

    def __init__(self, nu=0.1, kernel="rbf", gamma=None, tol=1e-6,
                 max_iter=100000):
        self.nu = nu
        self.kernel = kernel
        self.gamma = gamma
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        X = as_matrix(X, "X")
        n = X.shape[0]
        if n < 2:
            raise InputError(f"need at least 2 samples, got {n}")
        if not 0 < self.nu <= 1:
            raise ParameterError(f"nu must be in (0, 1], got {self.nu}")
        spec = KernelSpec(self.kernel, self.gamma)
        gamma = resolve_gamma(spec, X)
        K = kernel_matrix(spec.kind, gamma, X)
        C = 1.0 / (self.nu * n)

        alpha, grad, violation = _smo_minimize(
            K, np.zeros(n), C, self.tol, self.max_iter)
        rho = _offset_from_margin(grad, alpha, C)

        sv = alpha > 0.0
        self.support_vectors_ = X[sv].copy()
        self.dual_coef_ = alpha[sv].copy()
        self.rho_ = rho
        self.gamma_ = gamma
        self.C_ = C
        self.n_train_ = n
        self.kkt_residual_ = max(violation, 0.0)
        self.dual_objective_ = float(0.5 * alpha @ K @ alpha)
        self.alpha_full_ = alpha  # training-order duals, for diagnostics
        self.train_scores_ = alpha @ K - rho
        return self

    def decision_function(self, X):
        check_fitted(self, "dual_coef_")
        X = as_matrix(X, "X")
        Kq = kernel_matrix(self.kernel, self.gamma_, self.support_vectors_, X)
        return self.dual_coef_ @ Kq - self.rho_

    def save(self, path):
        check_fitted(self, "dual_coef_")
        w = ByteWriter()
        w.pack("4s", BASELINE_MAGIC)
        w.pack("H", FORMAT_VERSION)
        w.pack("B", _TAG_OCSVM)
        w.pack("B", _KERNEL_CODES[self.kernel])
        w.pack("d", self.gamma_ if self.gamma_ is not None else 0.0)
        w.pack("d", self.nu)
        w.pack("d", self.C_)
        w.pack("d", self.rho_)
        w.pack("II", *self.support_vectors_.shape)
        w.put_f32_array(self.support_vectors_)
        w.put_f32_array(self.dual_coef_)
        with open(path, "wb") as fh:
            fh.write(w.getvalue())

    @classmethod
    def _load_payload(cls, r):
        kind = _KERNEL_NAMES[r.unpack("B")]
        gamma = r.unpack("d")
        nu = r.unpack("d")
        C = r.unpack("d")
        rho = r.unpack("d")
        n_sv, d = r.unpack("II")
        sv = r.get_f32_array(n_sv * d).reshape(n_sv, d)
        coef = r.get_f32_array(n_sv)
        r.expect_end()
        est = cls(nu=nu, kernel=kind, gamma=None if kind == "linear" else gamma)
        est.support_vectors_ = sv
        est.dual_coef_ = coef
        est.rho_ = rho
        est.gamma_ = None if kind == "linear" else gamma
        est.C_ = C
        return est


class SVDD(BaseEstimator):
    """Support vector data description: minimal enclosing kernel hypersphere.

    Dual: maximize sum a_i K_ii - a'Ka over the same box-and-simplex set.
    decision_function(x) = R^2 - ||phi(x) - center||^2, zero on the sphere.
    C=None defaults to 1/(0.1*n) at fit time.
    """

    def __init__(self, C=None, kernel="rbf", gamma=None, tol=1e-6,
                 max_iter=100000):
        self.C = C
        self.kernel = kernel
        self.gamma = gamma
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        X = as_matrix(X, "X")
        n = X.shape[0]
        if n < 2:
            raise InputError(f"need at least 2 samples, got {n}")
        C = self.C if self.C is not None else 1.0 / (0.1 * n)
        if C < 1.0 / n:
            raise ParameterError(
                f"C={C} is infeasible: the simplex needs C >= 1/n = {1.0 / n}")
        spec = KernelSpec(self.kernel, self.gamma)
        gamma = resolve_gamma(spec, X)
        K = kernel_matrix(spec.kind, gamma, X)
        diag = np.diag(K).copy()

        alpha, grad, violation = _smo_minimize(
            2.0 * K, -diag, C, self.tol, self.max_iter)
        quad = float(alpha @ K @ alpha)
        # squared distance to center for row m: K_mm - 2(K a)_m + quad,
        # and grad_m = 2(K a)_m - K_mm, so dist2_m = quad - grad_m
        dist2 = quad - grad
        margin = (alpha > 0.0) & (alpha < C)
        on_sphere = margin if margin.any() else alpha > 0.0
        r2 = float(np.mean(dist2[on_sphere]))

        sv = alpha > 0.0
        self.support_vectors_ = X[sv].copy()
        self.dual_coef_ = alpha[sv].copy()
        self.r2_ = r2
        self.quad_ = quad
        self.gamma_ = gamma
        self.C_ = C
        self.kkt_residual_ = max(violation, 0.0)
        self.alpha_full_ = alpha
        return self

    def decision_function(self, X):
        check_fitted(self, "dual_coef_")
        X = as_matrix(X, "X")
        Kq = kernel_matrix(self.kernel, self.gamma_, self.support_vectors_, X)
        self_k = kernel_diag(self.kernel, self.gamma_, X)
        dist2 = self_k - 2.0 * (self.dual_coef_ @ Kq) + self.quad_
        return self.r2_ - dist2

    def save(self, path):
        check_fitted(self, "dual_coef_")
        w = ByteWriter()
        w.pack("4s", BASELINE_MAGIC)
        w.pack("H", FORMAT_VERSION)
        w.pack("B", _TAG_SVDD)
        w.pack("B", _KERNEL_CODES[self.kernel])
        w.pack("d", self.gamma_ if self.gamma_ is not None else 0.0)
        w.pack("d", self.C_)
        w.pack("d", self.r2_)
        w.pack("d", self.quad_)
        w.pack("II", *self.support_vectors_.shape)
        w.put_f32_array(self.support_vectors_)
        w.put_f32_array(self.dual_coef_)
        with open(path, "wb") as fh:
            fh.write(w.getvalue())

    @classmethod
    def _load_payload(cls, r):
        kind = _KERNEL_NAMES[r.unpack("B")]
        gamma = r.unpack("d")
        C = r.unpack("d")
        r2 = r.unpack("d")
        quad = r.unpack("d")
        n_sv, d = r.unpack("II")
        sv = r.get_f32_array(n_sv * d).reshape(n_sv, d)
        coef = r.get_f32_array(n_sv)
        r.expect_end()
        est = cls(C=C, kernel=kind, gamma=None if kind == "linear" else gamma)
        est.support_vectors_ = sv
        est.dual_coef_ = coef
        est.r2_ = r2
        est.quad_ = quad
        est.gamma_ = None if kind == "linear" else gamma
        est.C_ = C
        return est


class MPM(BaseEstimator):
    """Second-order-statistics hyperplane in a PCA subspace.

    Projects onto the top principal directions (rotation only, no
    centering, so the data mean stays away from the origin), solves
    w = (Cov + lam*I)^-1 * mean normalized to w'mean = 1, and thresholds
    at a lower quantile of the training scores.
    """

    def __init__(self, pca_dims=None, lam=1e-3, quantile=0.05):
        self.pca_dims = pca_dims
        self.lam = lam
        self.quantile = quantile

    def fit(self, X, y=None):
        X = as_matrix(X, "X")
        n, d = X.shape
        if n < 2:
            raise InputError(f"need at least 2 samples, got {n}")
        if self.lam <= 0:
            raise ParameterError(f"lam must be > 0, got {self.lam}")
        if not 0 < self.quantile < 1:
            raise ParameterError(f"quantile must be in (0, 1), got {self.quantile}")
        p_max = min(n - 1, d)
        p = self.pca_dims if self.pca_dims is not None else min(16, p_max)
        if not 1 <= p <= p_max:
            raise ParameterError(
                f"pca_dims must be in [1, {p_max}] for n={n}, d={d}; got {p}")

        self.mean_ = X.mean(axis=0)
        cov = np.atleast_2d(np.cov(X, rowvar=False))
        eigvals, eigvecs = np.linalg.eigh(cov)
        basis = eigvecs[:, ::-1][:, :p]  # descending variance
        # deterministic sign: largest-magnitude entry of each direction > 0
        anchor = np.argmax(np.abs(basis), axis=0)
        signs = np.sign(basis[anchor, np.arange(p)])
        signs[signs == 0] = 1.0
        basis = basis * signs

        Z = X @ basis
        mu = Z.mean(axis=0)
        cov_z = np.atleast_2d(np.cov(Z, rowvar=False))
        w0 = solve_spd(cov_z + self.lam * np.eye(p), mu)
        normalizer = float(w0 @ mu)
        if normalizer <= 0:
            raise NumericalError(
                "projected data mean is indistinguishable from the origin")
        w = w0 / normalizer

        scores = Z @ w
        self.basis_ = basis
        self.w_ = w
        self.rho_ = float(np.quantile(scores, self.quantile))
        self.lam_ = float(self.lam)
        self.train_score_mean_ = float(scores.mean())
        return self

    def decision_function(self, X):
        check_fitted(self, "w_")
        X = as_matrix(X, "X")
        return (X @ self.basis_) @ self.w_ - self.rho_

    def save(self, path):
        check_fitted(self, "w_")
        w = ByteWriter()
        w.pack("4s", BASELINE_MAGIC)
        w.pack("H", FORMAT_VERSION)
        w.pack("B", _TAG_MPM)
        w.pack("d", self.lam_)
        w.pack("d", self.quantile)
        w.pack("d", self.rho_)
        w.pack("II", *self.basis_.shape)
        w.put_f32_array(self.basis_)
        w.put_f32_array(self.mean_)
        w.put_f32_array(self.w_)
        with open(path, "wb") as fh:
            fh.write(w.getvalue())

    @classmethod
    def _load_payload(cls, r):
        lam = r.unpack("d")
        quantile = r.unpack("d")
        rho = r.unpack("d")
        d, p = r.unpack("II")
        basis = r.get_f32_array(d * p).reshape(d, p)
        mean = r.get_f32_array(d)
        w_vec = r.get_f32_array(p)
        r.expect_end()
        est = cls(pca_dims=p, lam=lam, quantile=quantile)
        est.basis_ = basis
        est.mean_ = mean
        est.w_ = w_vec
        est.rho_ = rho
        est.lam_ = lam
        return est


class BSVM(BaseEstimator):
    """Linear binary SVM against Gaussian pseudo-negative data.

    Draws n noise rows from N(0, sigma^2*I), labels them -1 against the
    +1 targets, and minimizes lam/2 ||w||^2 + mean hinge loss by
    full-batch subgradient descent with the 1/(lam*t) step schedule.
    The returned model is the averaged iterate.
    """

    def __init__(self, sigma=0.01, lam=1e-3, n_iter=2000, seed=0):
        self.sigma = sigma
        self.lam = lam
        self.n_iter = n_iter
        self.seed = seed

    def _objective(self, Xall, y, w, b):
        margins = y * (Xall @ w + b)
        hinge = np.maximum(0.0, 1.0 - margins).mean()
        return 0.5 * self.lam * float(w @ w) + float(hinge)

    def fit(self, X, y=None):
        X = as_matrix(X, "X")
        n, d = X.shape
        if self.sigma < 0:
            raise ParameterError(f"sigma must be >= 0, got {self.sigma}")
        if self.lam <= 0:
            raise ParameterError(f"lam must be > 0, got {self.lam}")
        rng = RngState(self.seed).substream("bsvm")
        noise = gaussian_sample(rng, n, d, 0.0, self.sigma)
        Xall = np.vstack([X, noise])
        labels = np.concatenate([np.ones(n), -np.ones(n)])

        w = np.zeros(d)
        b = 0.0
        w_sum = np.zeros(d)
        b_sum = 0.0
        checkpoints = max(1, self.n_iter // 10)
        path = []
        for t in range(1, self.n_iter + 1):
            margins = labels * (Xall @ w + b)
            viol = margins < 1.0
            m = Xall.shape[0]
            gw = self.lam * w - (labels[viol, None] * Xall[viol]).sum(axis=0) / m
            gb = -labels[viol].sum() / m
            eta = 1.0 / (self.lam * t)
            w = w - eta * gw
            b = b - eta * gb
            w_sum += w
            b_sum += b
            if t % checkpoints == 0 or t == self.n_iter:
                path.append(self._objective(Xall, labels, w_sum / t, b_sum / t))

        self.w_ = w_sum / self.n_iter
        self.b_ = b_sum / self.n_iter
        self.objective_path_ = np.asarray(path)
        self.sigma_ = float(self.sigma)
        margins = labels * (Xall @ self.w_ + self.b_)
        self.train_accuracy_ = float(np.mean(margins > 0.0))
        return self

    def decision_function(self, X):
        check_fitted(self, "w_")
        X = as_matrix(X, "X")
        return X @ self.w_ + self.b_

    def save(self, path):
        check_fitted(self, "w_")
        w = ByteWriter()
        w.pack("4s", BASELINE_MAGIC)
        w.pack("H", FORMAT_VERSION)
        w.pack("B", _TAG_BSVM)
        w.pack("d", self.sigma_)
        w.pack("d", self.lam)
        w.pack("d", self.b_)
        w.pack("I", self.w_.shape[0])
        w.put_f32_array(self.w_)
        with open(path, "wb") as fh:
            fh.write(w.getvalue())

    @classmethod
    def _load_payload(cls, r):
        sigma = r.unpack("d")
        lam = r.unpack("d")
        b = r.unpack("d")
        d = r.unpack("I")
        w_vec = r.get_f32_array(d)
        r.expect_end()
        est = cls(sigma=sigma, lam=lam)
        est.w_ = w_vec
        est.b_ = b
        est.sigma_ = sigma
        return est


class OneClassSVMPlus(BaseEstimator):
    """One-class SVM fit on the representation learned by OneClassCNN.

    A fitted cnn is used as-is; an unfitted (or None) cnn is cloned and
    trained on the fit data first.  Scoring composes the feature transform
    with the inner SVM's decision function.
    """

    def __init__(self, cnn=None, nu=0.1, kernel="rbf", gamma=None, tol=1e-6,
                 max_iter=100000):
        self.cnn = cnn
        self.nu = nu
        self.kernel = kernel
        self.gamma = gamma
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        X = as_matrix(X, "X")
        cnn = self.cnn if self.cnn is not None else OneClassCNN()
        if getattr(cnn, "params_", None) is None:
            cnn = type(cnn)(**cnn.get_params())
            cnn.fit(X)
        self.cnn_ = cnn
        self.svm_ = OneClassSVM(nu=self.nu, kernel=self.kernel,
                                gamma=self.gamma, tol=self.tol,
                                max_iter=self.max_iter)
        self.svm_.fit(cnn.transform(X))
        return self

    def decision_function(self, X):
        check_fitted(self, "svm_")
        return self.svm_.decision_function(self.cnn_.transform(X))


_LOADERS = {
    _TAG_OCSVM: OneClassSVM._load_payload,
    _TAG_SVDD: SVDD._load_payload,
    _TAG_MPM: MPM._load_payload,
    _TAG_BSVM: BSVM._load_payload,
}


def load_baseline_file(path):
    """Load any saved baseline model; the method tag byte picks the class."""
    with open(path, "rb") as fh:
        data = fh.read()
    r = ByteReader(data, source=str(path))
    r.expect_magic(BASELINE_MAGIC)
    version = r.unpack("H")
    if version != FORMAT_VERSION:
        raise ParseError(f"{path}: unsupported version {version}")
    tag = r.unpack("B")
    if tag not in _LOADERS:
        raise ParseError(f"{path}: unknown method tag {tag}")
    return _LOADERS[tag](r)
