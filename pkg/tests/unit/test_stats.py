"""
Unit tests for distribution functions, two-sample tests, per-cluster reports
and the permutation test
"""
import numpy as np
import pytest
from scipy import stats as scipy_stats

from src.clustering.hbac import fit_hbac
from src.clustering.partition import Centroid, Cluster, HbacConfig, Partition
from src.core.dataset import MetricKind
from src.core.errors import (
    DegenerateTableError,
    DegenerateVarianceError,
    DomainError,
    InsufficientSampleError,
    TrainerFailureError,
)
from src.core.sampling import split_sample
from src.stats.clusters import test_assignment as assignment_report
from src.stats.clusters import test_clusters as cluster_report
from src.stats.permutation import cluster_statistics, permutation_p_value, permutation_test
from src.stats.significance import bonferroni, chi2_test, contingency_table, welch_t_test
from src.stats.special import chi2_sf, student_t_cdf, student_t_sf, student_t_two_sided
from tests.conftest import numeric_schema


def manual_partition(k):
    clusters = [
        Cluster(id=i, member_indices=[i], centroid=Centroid(kind="mean", values=[float(i)]),
                metric_mean=0.0, metric_std=0.0)
        for i in range(k)
    ]
    return Partition(clusters=clusters, config=HbacConfig(n_min=1), feature_schema=numeric_schema(["x0"]),
                     source_split="manual", n_rows=k)


# ---------------------------------------------------------------------------
# Distribution functions
# ---------------------------------------------------------------------------

class TestSpecialFunctions:

    @pytest.mark.parametrize("df", [1.0, 2.5, 8.0, 30.0, 1000.0])
    @pytest.mark.parametrize("x", [-6.0, -1.5, -0.2, 0.0, 0.7, 2.0, 12.0])
    def test_t_cdf_matches_scipy(self, x, df):
        assert student_t_cdf(x, df) == pytest.approx(scipy_stats.t.cdf(x, df), rel=1e-9, abs=1e-15)
        assert student_t_sf(x, df) == pytest.approx(scipy_stats.t.sf(x, df), rel=1e-9, abs=1e-15)

    @pytest.mark.parametrize("df", [1.0, 2.0, 5.0, 40.0])
    @pytest.mark.parametrize("x", [0.001, 0.5, 3.841, 10.0, 80.0])
    def test_chi2_sf_matches_scipy(self, x, df):
        assert chi2_sf(x, df) == pytest.approx(scipy_stats.chi2.sf(x, df), rel=1e-9, abs=1e-300)

    def test_t_cdf_at_zero(self):
        for df in (1.0, 3.0, 50.0):
            assert student_t_cdf(0.0, df) == 0.5

    def test_chi2_boundaries(self):
        assert chi2_sf(0.0, 1.0) == 1.0
        assert chi2_sf(3.841, 1.0) == pytest.approx(0.05, abs=1e-4)

    def test_two_sided_is_twice_the_tail(self):
        assert student_t_two_sided(-2.0, 7.0) == pytest.approx(2 * scipy_stats.t.sf(2.0, 7.0))

    @pytest.mark.parametrize("df", [0.0, -1.0, float("nan")])
    def test_bad_degrees_of_freedom(self, df):
        with pytest.raises(DomainError):
            student_t_cdf(1.0, df)
        with pytest.raises(DomainError):
            chi2_sf(1.0, df)


# ---------------------------------------------------------------------------
# Two-sample tests
# ---------------------------------------------------------------------------

class TestWelch:

    def test_identical_samples(self):
        result = welch_t_test([1, 2, 3], [1, 2, 3])
        assert result.statistic == 0.0
        assert result.p_value == pytest.approx(1.0)

    def test_worked_example(self):
        result = welch_t_test([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])
        assert result.statistic == pytest.approx(-1.0)
        assert result.df == pytest.approx(8.0)
        assert result.p_value == pytest.approx(0.3466, abs=1e-4)

    def test_matches_scipy(self, rng):
        a, b = rng.normal(0, 1, 30), rng.normal(0.4, 2, 17)
        ours = welch_t_test(a, b)
        theirs = scipy_stats.ttest_ind(a, b, equal_var=False)
        assert ours.statistic == pytest.approx(theirs.statistic)
        assert ours.p_value == pytest.approx(theirs.pvalue)

    @pytest.mark.parametrize("seed", range(10))
    def test_swapping_samples_flips_the_sign(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(0, 1, int(rng.integers(2, 40)))
        b = rng.normal(0.5, 3, int(rng.integers(2, 40)))
        forward, backward = welch_t_test(a, b), welch_t_test(b, a)
        assert backward.statistic == -forward.statistic
        assert backward.df == pytest.approx(forward.df, rel=1e-12)
        assert backward.p_value == pytest.approx(forward.p_value, rel=1e-12)

    def test_zero_variance(self):
        with pytest.raises(DegenerateVarianceError):
            welch_t_test([0, 0, 0], [0, 0, 0])

    def test_too_small(self):
        with pytest.raises(InsufficientSampleError):
            welch_t_test([1.0], [1.0, 2.0])


class TestChi2:

    def test_equal_proportions(self):
        result = chi2_test([1, 0, 1, 0], [1, 1, 0, 0])
        assert result.statistic == 0.0
        assert result.p_value == 1.0

    def test_worked_example(self):
        a = [1] * 30 + [0] * 10
        b = [1] * 10 + [0] * 30
        np.testing.assert_array_equal(contingency_table(a, b), [[30, 10], [10, 30]])
        result = chi2_test(a, b)
        assert result.statistic == pytest.approx(20.0)
        assert result.p_value == pytest.approx(7.74e-6, rel=1e-2)

    def test_matches_scipy_without_yates(self, rng):
        a, b = rng.integers(0, 2, 60), rng.integers(0, 2, 45)
        statistic, p_value, _, _ = scipy_stats.chi2_contingency(contingency_table(a, b), correction=False)
        result = chi2_test(a, b)
        assert result.statistic == pytest.approx(statistic)
        assert result.p_value == pytest.approx(p_value)

    @pytest.mark.parametrize("seed", range(10))
    def test_invariant_under_label_swaps(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.integers(0, 2, int(rng.integers(5, 60)))
        b = rng.integers(0, 2, int(rng.integers(5, 60)))
        a[:2], b[:2] = [0, 1], [0, 1]
        base = chi2_test(a, b)
        for swapped in (chi2_test(b, a), chi2_test(1 - a, 1 - b), chi2_test(1 - b, 1 - a)):
            assert swapped.statistic == pytest.approx(base.statistic, rel=1e-12, abs=1e-15)
            assert swapped.p_value == pytest.approx(base.p_value, rel=1e-12)

    def test_zero_margin(self):
        with pytest.raises(DegenerateTableError):
            chi2_test([1, 1], [1, 1, 1])


class TestBonferroni:

    def test_single_test(self):
        assert bonferroni([0.03], 1) == [0.03]

    def test_scaling(self):
        assert bonferroni([0.01, 0.40], 2) == pytest.approx([0.02, 0.80])

    def test_capped_at_one(self):
        assert bonferroni([0.40, 0.90], 3) == [1.0, 1.0]

    def test_invalid_input(self):
        with pytest.raises(ValueError):
            bonferroni([0.1], 0)
        with pytest.raises(ValueError):
            bonferroni([1.5], 1)


# ---------------------------------------------------------------------------
# Per-cluster reports
# ---------------------------------------------------------------------------

class TestClusterReports:

    def test_single_cluster_has_nothing_to_test(self):
        report = assignment_report(manual_partition(1), np.zeros(5, dtype=int), np.arange(5.0),
                                   MetricKind.CONTINUOUS)
        assert report.tests == []
        assert not report.any_significant

    def test_two_point_masses_both_significant(self, two_mass_dataset):
        split = split_sample(two_mass_dataset.n_rows, 0.2, seed=1)
        partition = fit_hbac(two_mass_dataset.subset(split.train), HbacConfig(n_min=10))
        report = cluster_report(partition, two_mass_dataset.subset(split.test),
                                split_info=split.summary())
        assert partition.k == 2
        assert [t.test_kind for t in report.tests] == ["chi2", "chi2"]
        assert report.significant_clusters() == [0, 1]
        assert report.split_info["n_test"] == 80
        for test in report.tests:
            assert test.p_adjusted == pytest.approx(min(1.0, 2 * test.p_raw))
            assert test.difference == pytest.approx(test.mean_in - test.mean_out)

    def test_untestable_cluster_is_kept(self):
        labels = np.array([0, 0, 0, 1, 1, 1, 2])
        metric = np.array([1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 5.0])
        report = assignment_report(manual_partition(3), labels, metric, MetricKind.CONTINUOUS)
        assert [t.testable for t in report.tests] == [True, True, False]
        assert report.tests[2].reason == "insufficient_sample"
        assert report.tests[2].n_in == 1
        assert report.n_tested == 2
        assert report.tests[0].p_adjusted == pytest.approx(min(1.0, 2 * report.tests[0].p_raw))

    def test_uncorrected_uses_raw_p(self):
        labels = np.array([0] * 20 + [1] * 20)
        metric = np.r_[np.linspace(0, 1, 20), np.linspace(0.5, 1.5, 20)]
        report = assignment_report(manual_partition(2), labels, metric, MetricKind.CONTINUOUS,
                                   correction="none")
        for test in report.tests:
            assert test.p_adjusted == test.p_raw
            assert test.significant == (test.p_raw <= 0.05)

    def test_adjusted_never_below_raw(self, rng):
        labels = rng.integers(0, 4, 200)
        report = assignment_report(manual_partition(4), labels, rng.normal(size=200),
                                   MetricKind.CONTINUOUS)
        for test in report.tests:
            assert 0.0 <= test.p_raw <= test.p_adjusted <= 1.0


# ---------------------------------------------------------------------------
# Permutation test
# ---------------------------------------------------------------------------

def label_mean_trainer(features, labels, seed):
    return float(np.mean(labels))


def labels_as_metric(model, features, labels):
    return np.asarray(labels, dtype=float)


def sign_partition(features, labels, metric):
    return (features[:, 0] > 0).astype(int)


class TestPermutation:

    def test_observed_above_every_null_value(self):
        assert permutation_p_value(5.0, np.arange(99.0) / 100) == pytest.approx(0.01)

    def test_observed_below_every_null_value(self):
        assert permutation_p_value(-1.0, np.arange(99.0)) == pytest.approx(1.0)

    def test_nan_observed(self):
        assert permutation_p_value(float("nan"), np.zeros(19)) == 1.0

    def test_cluster_statistics_skip_unassigned_rows(self):
        stats = cluster_statistics(np.array([1.0, 3.0, 100.0, 5.0]), np.array([0, 1, -1, 1]), 2)
        np.testing.assert_allclose(stats, [3.0, 3.0])

    def test_perfect_dependence_gets_smallest_p(self, rng):
        features = rng.normal(size=(40, 2))
        labels = (features[:, 0] > 0).astype(int)
        result = permutation_test(features, labels, label_mean_trainer, labels_as_metric,
                                  sign_partition, n_perm=19, seed=3)
        assert result.observed == pytest.approx([1.0, 1.0])
        assert result.p_values == pytest.approx([0.05, 0.05])

    def test_p_value_matches_exceed_counts(self, rng):
        features = rng.normal(size=(50, 2))
        labels = rng.integers(0, 2, 50)
        result = permutation_test(features, labels, label_mean_trainer, labels_as_metric,
                                  sign_partition, n_perm=49, seed=8)
        for p, count in zip(result.p_values, result.exceed_counts):
            assert p == pytest.approx((1 + count) / 50)
            assert 0.0 < p <= 1.0

    def test_deterministic_per_seed(self, rng):
        features = rng.normal(size=(30, 1))
        labels = rng.integers(0, 2, 30)
        args = (features, labels, label_mean_trainer, labels_as_metric, sign_partition)
        assert permutation_test(*args, n_perm=29, seed=2) == permutation_test(*args, n_perm=29, seed=2)

    def test_refit_with_two_clusters_matches_fixed(self, rng):
        features = rng.normal(size=(30, 1))
        labels = rng.integers(0, 2, 30)
        args = (features, labels, label_mean_trainer, labels_as_metric, sign_partition)
        fixed = permutation_test(*args, n_perm=19, seed=4)
        refit = permutation_test(*args, n_perm=19, seed=4, refit_partition=True)
        assert refit.p_values == pytest.approx(fixed.p_values)

    def test_too_few_permutations(self, rng):
        with pytest.raises(ValueError):
            permutation_test(np.zeros((4, 1)), np.array([0, 1, 0, 1]), label_mean_trainer,
                             labels_as_metric, sign_partition, n_perm=10, seed=0)

    def test_trainer_failure_is_wrapped(self):
        def broken(features, labels, seed):
            raise RuntimeError("no convergence")

        with pytest.raises(TrainerFailureError):
            permutation_test(np.zeros((4, 1)), np.array([0, 1, 0, 1]), broken,
                             labels_as_metric, sign_partition, n_perm=19, seed=0)
