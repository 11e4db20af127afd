"""AUROC and ROC contracts, checked against exact pair counting."""

import numpy as np
import pytest

from helpers import auroc_pairs_fraction, auroc_rank_fraction
from oneclass.exceptions import InputError
from oneclass.metrics import auroc, roc_curve, trapezoid_area


class TestAuroc:
    def test_perfect_separation(self):
        assert auroc([0.9, 0.8], [0.3, 0.1]) == 1.0

    def test_all_ties(self):
        assert auroc([0.5, 0.5, 0.5], [0.5, 0.5]) == 0.5

    def test_hand_counted_pairs(self):
        assert auroc([0.9, 0.4], [0.6, 0.2]) == 0.75

    def test_pair_symmetry(self):
        rng = np.random.default_rng(0)
        a = rng.integers(0, 6, size=13) / 4.0
        b = rng.integers(0, 6, size=9) / 4.0
        assert auroc(a, b) + auroc(b, a) == 1.0

    def test_invariant_under_monotone_transform(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal(20)
        b = rng.standard_normal(15)
        assert auroc(a, b) == pytest.approx(auroc(np.exp(a), np.exp(b)),
                                            abs=1e-15)

    def test_matches_bruteforce_with_ties(self):
        rng = np.random.default_rng(2)
        for _ in range(60):
            n_t = int(rng.integers(1, 51))
            n_n = int(rng.integers(1, 51))
            t = rng.integers(0, 8, size=n_t) / 8.0
            n = rng.integers(0, 8, size=n_n) / 8.0
            exact_pairs = auroc_pairs_fraction(t.tolist(), n.tolist())
            exact_ranks = auroc_rank_fraction(t.tolist(), n.tolist())
            assert exact_pairs == exact_ranks
            assert abs(auroc(t, n) - float(exact_pairs)) < 1e-12

    def test_input_validation(self):
        with pytest.raises(InputError):
            auroc([], [0.1])
        with pytest.raises(InputError):
            auroc([0.5], [])
        with pytest.raises(InputError):
            auroc([np.nan], [0.1])


class TestRocCurve:
    def test_perfect_separation_passes_through_corner(self):
        points = roc_curve([0.9, 0.8], [0.3, 0.1])
        assert (0.0, 1.0) in points

    def test_endpoints_and_monotonicity(self):
        rng = np.random.default_rng(3)
        points = roc_curve(rng.standard_normal(30), rng.standard_normal(40))
        assert points[0] == (0.0, 0.0)
        assert points[-1] == (1.0, 1.0)
        fprs = [p[0] for p in points]
        tprs = [p[1] for p in points]
        assert all(b >= a for a, b in zip(fprs, fprs[1:]))
        assert all(b >= a for a, b in zip(tprs, tprs[1:]))

    def test_two_distinct_scores_give_three_points(self):
        assert len(roc_curve([0.7], [0.2])) == 3

    def test_area_equals_auroc(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            n_t = int(rng.integers(1, 40))
            n_n = int(rng.integers(1, 40))
            t = rng.integers(0, 10, size=n_t) / 3.0
            n = rng.integers(0, 10, size=n_n) / 3.0
            points = roc_curve(t, n)
            assert abs(trapezoid_area(points) - auroc(t, n)) < 1e-12
