"""
Per-cluster bias tests on held-out rows.

Every cluster is compared with the rest of the test set: Welch's t-test for a
continuous metric, Pearson's χ² for a binary one. Clusters that cannot be
tested (too few rows, zero variance, a zero table margin) stay in the report
with the reason instead of being dropped.
"""
import logging
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel

from src.clustering.partition import Partition, assign_all
from src.core.dataset import Dataset, MetricKind
from src.core.errors import AuditError

from .significance import bonferroni, chi2_test, welch_t_test

logger = logging.getLogger(__name__)

Correction = Literal["bonferroni", "none"]


class ClusterTest(BaseModel):
    cluster_index: int
    cluster_id: int
    n_in: int
    n_out: int
    mean_in: Optional[float] = None
    mean_out: Optional[float] = None
    difference: Optional[float] = None
    statistic: Optional[float] = None
    p_raw: Optional[float] = None
    p_adjusted: Optional[float] = None
    test_kind: Literal["welch_t", "chi2", "permutation"]
    testable: bool = True
    reason: Optional[str] = None
    significant: bool = False


class TestReport(BaseModel):
    __test__ = False

    tests: List[ClusterTest]
    alpha: float
    correction: Correction = "bonferroni"
    metric_kind: MetricKind
    n_test: int
    split_info: Optional[Dict[str, Any]] = None

    @property
    def n_tested(self) -> int:
        return sum(1 for t in self.tests if t.testable)

    @property
    def any_significant(self) -> bool:
        return any(t.significant for t in self.tests)

    def significant_clusters(self) -> List[int]:
        return [t.cluster_index for t in self.tests if t.significant]


def apply_correction(tests: List[ClusterTest], alpha: float, correction: Correction) -> List[ClusterTest]:
    """Fill ``p_adjusted``/``significant`` with k = number of testable clusters."""
    tested = [t for t in tests if t.testable]
    if correction == "bonferroni" and tested:
        adjusted = bonferroni([t.p_raw for t in tested], len(tested))
    else:
        adjusted = [t.p_raw for t in tested]
    by_index = {t.cluster_index: p for t, p in zip(tested, adjusted)}
    out = []
    for t in tests:
        if t.cluster_index in by_index:
            p = by_index[t.cluster_index]
            t = t.model_copy(update={"p_adjusted": p, "significant": p <= alpha})
        out.append(t)
    return out


def contrast(metric: np.ndarray, inside: np.ndarray) -> Dict[str, Any]:
    """Sizes and means of a cluster against the rest of the rows."""
    n_in = int(inside.sum())
    n_out = int((~inside).sum())
    mean_in = float(metric[inside].mean()) if n_in else None
    mean_out = float(metric[~inside].mean()) if n_out else None
    difference = mean_in - mean_out if n_in and n_out else None
    return dict(n_in=n_in, n_out=n_out, mean_in=mean_in, mean_out=mean_out, difference=difference)


def test_assignment(
    partition: Partition,
    labels: np.ndarray,
    metric: np.ndarray,
    metric_kind: MetricKind,
    alpha: float = 0.05,
    correction: Correction = "bonferroni",
    split_info: Optional[Dict[str, Any]] = None,
) -> TestReport:
    """Test each cluster against the rest, given the cluster position of every row."""
    kind = MetricKind(metric_kind)
    metric = np.asarray(metric, dtype=float)
    labels = np.asarray(labels)
    report = dict(alpha=alpha, correction=correction, metric_kind=kind,
                  n_test=len(metric), split_info=split_info)
    if partition.k < 2:
        return TestReport(tests=[], **report)

    test_kind = "welch_t" if kind == MetricKind.CONTINUOUS else "chi2"
    run = welch_t_test if kind == MetricKind.CONTINUOUS else chi2_test

    tests: List[ClusterTest] = []
    for position, cluster in enumerate(partition.clusters):
        inside = labels == position
        fields = dict(cluster_index=position, cluster_id=cluster.id, test_kind=test_kind,
                      **contrast(metric, inside))
        try:
            result = run(metric[inside], metric[~inside])
        except AuditError as exc:
            tests.append(ClusterTest(testable=False, reason=exc.code, **fields))
            continue
        tests.append(ClusterTest(statistic=result.statistic, p_raw=result.p_value, **fields))

    tests = apply_correction(tests, alpha, correction)
    logger.info("[TEST] %d clusters tested on %d rows, %d significant at alpha=%g",
                sum(t.testable for t in tests), len(metric),
                sum(t.significant for t in tests), alpha)
    return TestReport(tests=tests, **report)


def test_clusters(
    partition: Partition,
    dataset_test: Dataset,
    metric_kind: Optional[MetricKind] = None,
    alpha: float = 0.05,
    correction: Correction = "bonferroni",
    split_info: Optional[Dict[str, Any]] = None,
) -> TestReport:
    """Assign ``dataset_test`` to the partition by centroid and test every cluster."""
    kind = metric_kind or dataset_test.schema.metric_kind
    if partition.k < 2:
        return test_assignment(partition, np.empty(0, dtype=int), dataset_test.metric, kind,
                               alpha, correction, split_info)
    labels = assign_all(partition, dataset_test)
    return test_assignment(partition, labels, dataset_test.metric, kind, alpha, correction, split_info)


test_assignment.__test__ = False
test_clusters.__test__ = False
