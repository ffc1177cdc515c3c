"""
Unit tests for the Calinski-Harabasz score and cross-validated n_min selection
"""
import numpy as np
import pytest

from src.clustering.partition import HbacConfig
from src.core.errors import InfeasibleGridError, UndefinedScoreError
from src.core.sampling import fold_blocks
from src.selection.calinski import ChScore, calinski_harabasz
from src.selection.cv import (
    GRID_PRESETS,
    FoldScore,
    evaluate_fold,
    feasible_candidates,
    resolve_grid,
    select_n_min,
    summarize_selection,
)
from tests.conftest import make_dataset


def four_masses(per_mass=20):
    """Masses at (0,0), (0,1), (10,0), (10,1) with metric 0, 1, 2, 3."""
    points = [(0, 0), (0, 1), (10, 0), (10, 1)]
    features = np.repeat(np.array(points, dtype=float), per_mass, axis=0)
    metric = np.repeat(np.arange(4.0), per_mass)
    return make_dataset(features, metric)


def ch_by_hand(metric, labels):
    metric = np.asarray(metric, dtype=float)
    groups = sorted(set(labels))
    grand = metric.mean()
    ssb = ssw = 0.0
    for g in groups:
        block = metric[np.asarray(labels) == g]
        ssb += len(block) * (block.mean() - grand) ** 2
        ssw += ((block - block.mean()) ** 2).sum()
    k, n = len(groups), len(metric)
    return (ssb / (k - 1)) / (ssw / (n - k))


def fold_score(n_min, fold, value=0.0, infinite=False):
    return FoldScore(n_min=n_min, fold=fold, n_clusters_fit=2,
                     score=ChScore(value=value, infinite=infinite, k=2, n=10))


# ---------------------------------------------------------------------------
# Calinski-Harabasz
# ---------------------------------------------------------------------------

class TestCalinskiHarabasz:

    def test_worked_example(self):
        score = calinski_harabasz([0, 2, 4, 6], [0, 0, 1, 1])
        assert score.value == pytest.approx(8.0, rel=1e-12)
        assert not score.infinite

    def test_zero_within_is_infinite(self):
        score = calinski_harabasz([1, 1, 2, 2], [0, 0, 1, 1])
        assert score.infinite
        assert score.score == float("inf")

    def test_single_cluster_undefined(self):
        with pytest.raises(UndefinedScoreError):
            calinski_harabasz([1, 2, 3], [0, 0, 0])

    def test_as_many_clusters_as_rows_undefined(self):
        with pytest.raises(UndefinedScoreError):
            calinski_harabasz([1, 2], [0, 1])

    @pytest.mark.parametrize("case", range(100))
    def test_matches_direct_formula(self, case):
        rng = np.random.default_rng(500 + case)
        n = int(rng.integers(6, 61))
        k = int(rng.integers(2, 6))
        metric = rng.normal(size=n) * rng.uniform(0.1, 10.0)
        labels = rng.integers(0, k, size=n)
        labels[:k] = np.arange(k)
        assert calinski_harabasz(metric, labels).value == pytest.approx(ch_by_hand(metric, labels), rel=1e-12)

    @pytest.mark.parametrize("scale,shift", [(3.0, 0.0), (-2.0, 5.0), (0.01, -100.0)])
    def test_affine_invariance(self, rng, scale, shift):
        metric = rng.normal(size=40)
        labels = rng.integers(0, 3, size=40)
        base = calinski_harabasz(metric, labels).value
        assert calinski_harabasz(scale * metric + shift, labels).value == pytest.approx(base, rel=1e-9)

    def test_labels_need_not_be_contiguous(self):
        assert calinski_harabasz([0, 2, 4, 6], [7, 7, 3, 3]).value == pytest.approx(8.0)


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------

class TestGrid:

    def test_fractions_of_training_rows(self):
        assert resolve_grid(800, [0.02, 0.04, 0.08, 0.12]) == [16, 32, 64, 96]

    def test_fractions_never_below_one(self):
        assert resolve_grid(10, [0.01]) == [1]

    def test_presets(self):
        assert GRID_PRESETS["cub2014"] == [5000, 10000, 20000, 30000]
        assert GRID_PRESETS["cub2019"] == [1000, 2000, 3500, 5000]

    def test_feasibility_uses_smallest_training_fold(self):
        pairs = fold_blocks(23, 5, seed=0)
        smallest = min(len(t) for t, _ in pairs)
        assert smallest == 18
        assert feasible_candidates([5, 9, 10], pairs) == [5, 9]


# ---------------------------------------------------------------------------
# Selection
# ---------------------------------------------------------------------------

class TestSummarizeSelection:

    def test_highest_mean_wins(self):
        scores = [fold_score(2, 0, 5.0), fold_score(2, 1, 7.0),
                  fold_score(4, 0, 1.0), fold_score(4, 1, 2.0)]
        result = summarize_selection([2, 4], [2, 4], 2, 0, scores)
        assert result.chosen == 2
        assert result.candidates[0].mean_score == pytest.approx(6.0)

    def test_tie_goes_to_smaller_n_min(self):
        scores = [fold_score(4, 0, 3.0), fold_score(2, 0, 3.0)]
        assert summarize_selection([4, 2], [2, 4], 1, 0, scores).chosen == 2

    def test_infinite_beats_finite(self):
        scores = [fold_score(2, 0, 100.0), fold_score(8, 0, infinite=True)]
        result = summarize_selection([2, 8], [2, 8], 1, 0, scores)
        assert result.chosen == 8
        assert result.candidates[1].infinite

    def test_order_of_arrival_does_not_matter(self):
        scores = [fold_score(n, f, float(n * 10 + f)) for n in (2, 3) for f in range(3)]
        forward = summarize_selection([2, 3], [2, 3], 3, 0, scores)
        backward = summarize_selection([2, 3], [2, 3], 3, 0, list(reversed(scores)))
        assert forward == backward

    def test_infeasible_candidates_are_listed(self):
        result = summarize_selection([2, 50], [2], 1, 0, [fold_score(2, 0, 1.0)])
        assert [c.feasible for c in result.candidates] == [True, False]

    def test_empty_feasible_set(self):
        with pytest.raises(InfeasibleGridError):
            summarize_selection([100], [], 5, 0, [])


class TestSelectNMin:

    def test_singleton_grid(self):
        assert select_n_min(four_masses(), [2], 5, HbacConfig(n_min=1)).chosen == 2

    def test_grid_too_large(self):
        dataset = four_masses(4)
        with pytest.raises(InfeasibleGridError):
            select_n_min(dataset, [dataset.n_rows], 5, HbacConfig(n_min=1))

    def test_under_splitting_candidate_loses(self):
        result = select_n_min(four_masses(), [5, 20], 5, HbacConfig(n_min=1))
        assert result.chosen == 5
        assert result.candidates[0].infinite

    def test_matches_brute_force_over_folds(self, rng):
        dataset = make_dataset(rng.normal(size=(120, 2)), rng.normal(size=120))
        base = HbacConfig(n_min=1, seed=4)
        grid = [6, 12, 24]
        result = select_n_min(dataset, grid, 4, base, seed=4)

        pairs = fold_blocks(dataset.n_rows, 4, 4)
        means = {}
        for n_min in grid:
            scores = [evaluate_fold(dataset, t, h, n_min, base, f).score
                      for f, (t, h) in enumerate(pairs)]
            means[n_min] = (any(s.infinite for s in scores), np.mean([s.value for s in scores]))
        best = min(grid, key=lambda n: (not means[n][0], -means[n][1], n))
        assert result.chosen == best
        assert len(result.fold_scores) == len(grid) * 4
