"""AUROC and ROC curves for one-class evaluation.

AUROC is computed from average ranks (Mann-Whitney statistic: the
fraction of (target, negative) pairs where the target scores higher, ties
counted one half), which equals the trapezoidal area under the ROC curve.
"""

import numpy as np
from scipy.stats import rankdata

from .exceptions import InputError


def _check_scores(scores, name):
    arr = np.asarray(scores, dtype=np.float64).ravel()
    if arr.size == 0:
        raise InputError(f"{name} is empty")
    if np.isnan(arr).any():
        raise InputError(f"{name} contains NaN scores")
    return arr


def auroc(target_scores, negative_scores):
    """Probability that a random target outscores a random negative."""
    t = _check_scores(target_scores, "target_scores")
    n = _check_scores(negative_scores, "negative_scores")
    ranks = rankdata(np.concatenate([t, n]), method="average")
    rank_sum = ranks[:t.size].sum()
    u = rank_sum - t.size * (t.size + 1) / 2.0
    return float(u / (t.size * n.size))


def roc_curve(target_scores, negative_scores):
    """ROC points (fpr, tpr) sweeping thresholds over the unique scores.

    Starts at (0, 0), ends at (1, 1); both coordinates are non-decreasing.
    Trapezoidal area equals auroc().
    """
    t = np.sort(_check_scores(target_scores, "target_scores"))
    n = np.sort(_check_scores(negative_scores, "negative_scores"))
    thresholds = np.unique(np.concatenate([t, n]))[::-1]
    points = [(0.0, 0.0)]
    for th in thresholds:
        tpr = (t.size - np.searchsorted(t, th, side="left")) / t.size
        fpr = (n.size - np.searchsorted(n, th, side="left")) / n.size
        points.append((float(fpr), float(tpr)))
    return points


def trapezoid_area(points):
    """Area under a piecewise-linear curve given as (x, y) points."""
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area
