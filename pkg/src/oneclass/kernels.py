"""Linear and RBF kernels for the support-vector baselines."""

from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError, ShapeError

KERNEL_KINDS = ("linear", "rbf")


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"
    gamma: float | None = None  # rbf width; None resolves to 1/(d*var) at fit

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ParameterError(f"kernel must be one of {KERNEL_KINDS}, got {self.kind!r}")
        if self.kind == "rbf" and self.gamma is not None and self.gamma <= 0:
            raise ParameterError(f"gamma must be > 0, got {self.gamma}")


def resolve_gamma(spec, X):
    """Fill in the default rbf width 1/(d * var(X)) when gamma is unset."""
    if spec.kind != "rbf":
        return None
    if spec.gamma is not None:
        return spec.gamma
    var = float(np.var(X))
    if var <= 0:
        var = 1.0  # constant data: any width works, pick unit scale
    return 1.0 / (X.shape[1] * var)


def kernel_matrix(kind, gamma, X, Y=None):
    """Gram matrix k(X_i, Y_j); Y=None means k(X_i, X_j)."""
    Y = X if Y is None else Y
    if X.shape[1] != Y.shape[1]:
        raise ShapeError(f"kernel inputs disagree: {X.shape} vs {Y.shape}")
    if kind == "linear":
        return X @ Y.T
    sq = (np.sum(X * X, axis=1)[:, None] + np.sum(Y * Y, axis=1)[None, :]
          - 2.0 * (X @ Y.T))
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def kernel_diag(kind, gamma, X):
    """k(x, x) per row, without forming the full Gram matrix."""
    if kind == "linear":
        return np.sum(X * X, axis=1)
    return np.ones(X.shape[0])
