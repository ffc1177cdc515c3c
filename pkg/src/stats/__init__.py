"""
Hypothesis tests for per-cluster bias differences
"""
from .clusters import ClusterTest, TestReport, test_assignment, test_clusters
from .permutation import PermutationResult, permutation_p_value, permutation_test
from .significance import StatResult, bonferroni, chi2_test, welch_t_test
from .special import chi2_sf, student_t_cdf, student_t_sf, student_t_two_sided
