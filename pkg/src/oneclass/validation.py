"""Input validation helpers shared by all estimators and operations."""

import numpy as np

from .exceptions import InputError, NotFittedError, ShapeError


def as_matrix(x, name="x", allow_empty=False):
    """Coerce to a freshly allocated float64 C-order 2-D array.

    Raises ShapeError for wrong dimensionality and InputError for
    non-finite entries or (unless allowed) zero rows.
    """
    arr = np.array(x, dtype=np.float64, order="C", copy=True)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.shape[0] == 0 and not allow_empty:
        raise InputError(f"{name} has no rows")
    if not np.isfinite(arr).all():
        raise InputError(f"{name} contains non-finite entries")
    return arr


def as_vector(x, name="x"):
    """Coerce to a freshly allocated float64 1-D array of finite values."""
    arr = np.array(x, dtype=np.float64, copy=True).ravel()
    if not np.isfinite(arr).all():
        raise InputError(f"{name} contains non-finite entries")
    return arr


def check_binary_labels(labels, n_rows, name="labels"):
    """Validate a 0/1 label vector of the expected length."""
    arr = np.asarray(labels, dtype=np.float64).ravel()
    if arr.shape[0] != n_rows:
        raise InputError(f"{name} has length {arr.shape[0]}, expected {n_rows}")
    if not np.isin(arr, (0.0, 1.0)).all():
        raise InputError(f"{name} must contain only 0 and 1")
    return arr


def check_fitted(estimator, attribute):
    if getattr(estimator, attribute, None) is None:
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted; call fit() first"
        )
