"""
Permutation test for per-cluster metric differences.

The labels are shuffled to break their dependence on the features, the
classifier is retrained and the metric recomputed. With a fixed partition each
cluster's observed |mean_in − mean_out| is compared with its own permuted
values; with ``refit_partition=True`` the partition is rebuilt per permutation
and each observed statistic is compared with the permuted maximum over clusters.
"""
import logging
from typing import Any, Callable, List

import numpy as np
from pydantic import BaseModel

from src.core.errors import TrainerFailureError
from src.core.rng import STREAM_PERMUTATION, RngStream

logger = logging.getLogger(__name__)

# (features, labels, seed) -> model
Trainer = Callable[[np.ndarray, np.ndarray, int], Any]
# (model, features, labels) -> metric per row
MetricFn = Callable[[Any, np.ndarray, np.ndarray], np.ndarray]
# (features, labels, metric) -> cluster position per row, -1 for rows left out
PartitionFn = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]

MIN_PERMUTATIONS = 19


class PermutationResult(BaseModel):
    observed: List[float]
    p_values: List[float]
    exceed_counts: List[int]
    n_perm: int
    refit_partition: bool = False


def permutation_p_value(observed: float, null: np.ndarray) -> float:
    """(1 + #{null ≥ observed}) / (1 + len(null)); never 0."""
    null = np.asarray(null, dtype=float)
    if np.isnan(observed):
        return 1.0
    return float((1 + int((null >= observed).sum())) / (1 + len(null)))


def cluster_statistics(metric: np.ndarray, assignment: np.ndarray, k: int) -> np.ndarray:
    """|mean_in − mean_out| per cluster over rows with assignment ≥ 0 (NaN if a side is empty)."""
    metric = np.asarray(metric, dtype=float)
    assignment = np.asarray(assignment)
    used = assignment >= 0
    stats = np.full(k, np.nan)
    for position in range(k):
        inside = used & (assignment == position)
        outside = used & (assignment != position)
        if inside.any() and outside.any():
            stats[position] = abs(metric[inside].mean() - metric[outside].mean())
    return stats


def _train(trainer: Trainer, features: np.ndarray, labels: np.ndarray, seed: int, index: int) -> Any:
    try:
        return trainer(features, labels, seed)
    except Exception as exc:
        raise TrainerFailureError(
            f"trainer failed on permutation {index}: {exc}", permutation=index, seed=seed
        ) from exc


def permutation_test(
    features: np.ndarray,
    labels: np.ndarray,
    trainer: Trainer,
    metric_fn: MetricFn,
    partition_fn: PartitionFn,
    n_perm: int,
    seed: int,
    refit_partition: bool = False,
) -> PermutationResult:
    """Per-cluster permutation p-values (see module docstring)."""
    if n_perm < MIN_PERMUTATIONS:
        raise ValueError(f"n_perm must be at least {MIN_PERMUTATIONS}, got {n_perm}")
    features = np.asarray(features)
    labels = np.asarray(labels)

    model = _train(trainer, features, labels, seed, -1)
    metric = metric_fn(model, features, labels)
    assignment = np.asarray(partition_fn(features, labels, metric))
    k = int(assignment.max()) + 1 if (assignment >= 0).any() else 0
    observed = cluster_statistics(metric, assignment, k)

    stream = RngStream(seed=seed, stream_id=STREAM_PERMUTATION)
    null = np.empty((n_perm, k))
    for i in range(n_perm):
        order = stream.child(i).generator().permutation(len(labels))
        shuffled = labels[order]
        model_p = _train(trainer, features, shuffled, seed, i)
        metric_p = metric_fn(model_p, features, shuffled)
        if refit_partition:
            assignment_p = np.asarray(partition_fn(features, shuffled, metric_p))
            k_p = int(assignment_p.max()) + 1 if (assignment_p >= 0).any() else 0
            stats_p = cluster_statistics(metric_p, assignment_p, k_p)
            peak = np.nanmax(stats_p) if np.isfinite(stats_p).any() else np.nan
            null[i, :] = peak
        else:
            null[i, :] = cluster_statistics(metric_p, assignment, k)

    # NaN null draws never count as exceeding
    null = np.nan_to_num(null, nan=-np.inf)
    exceed = [int((null[:, j] >= observed[j]).sum()) for j in range(k)]
    p_values = [permutation_p_value(observed[j], null[:, j]) for j in range(k)]
    logger.debug("[TEST] permutation test: %d clusters, %d permutations, refit=%s",
                 k, n_perm, refit_partition)
    return PermutationResult(
        observed=[float(x) for x in observed],
        p_values=[float(p) for p in p_values],
        exceed_counts=exceed,
        n_perm=n_perm,
        refit_partition=refit_partition,
    )


permutation_test.__test__ = False
