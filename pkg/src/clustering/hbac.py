"""
Hierarchical Bias-Aware Clustering (HBAC).

Starting from one cluster holding every row, each iteration picks the
not-yet-selected cluster with the highest metric standard deviation and tries
a binary split. The split is kept only if one child has a metric mean at least
as high as the parent's and both children have ``n_min`` rows. The selected
cluster is flagged either way, so a rejected cluster is never retried.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from src.core.dataset import Dataset, MetricKind, SplitterKind, dataset_fingerprint
from src.core.errors import DegenerateSplitError, InsufficientDataError, SchemaMismatchError
from src.core.rng import STREAM_SPLITTER, RngStream

from .kmeans import BinarySplit, split_two_kmeans
from .kmodes import column_modes, split_two_kmodes
from .partition import Centroid, Cluster, FitStep, HbacConfig, Partition

logger = logging.getLogger(__name__)

# relative slack on the acceptance comparison
MEAN_TOLERANCE = 1e-12


@dataclass
class _Node:
    id: int
    members: np.ndarray
    parent_id: Optional[int] = None
    selected: bool = False


def split_matrix(dataset: Dataset, config: HbacConfig) -> np.ndarray:
    """Rows handed to the splitter: encoded features, plus the metric when weighted."""
    features = dataset.encoded()
    if config.metric_weight <= 0.0:
        return features
    metric = np.asarray(dataset.metric, dtype=float)
    if config.splitter == SplitterKind.KMODES:
        if dataset.schema.metric_kind != MetricKind.BINARY:
            raise SchemaMismatchError("metric-weighted k-modes splitting needs a binary metric")
        return np.column_stack([features, metric])
    return np.column_stack([features, config.metric_weight * metric])


def _split(rows: np.ndarray, config: HbacConfig, stream: RngStream) -> BinarySplit:
    if config.splitter == SplitterKind.KMODES:
        return split_two_kmodes(rows, seed=stream, max_sweeps=config.max_sweeps)
    return split_two_kmeans(rows, seed=stream, max_sweeps=config.max_sweeps)


def _accepts(parent_mean: float, child_means: List[float]) -> bool:
    return max(child_means) >= parent_mean - MEAN_TOLERANCE * max(1.0, abs(parent_mean))


def fit_hbac(dataset: Dataset, config: HbacConfig) -> Partition:
    """Fit an HBAC partition of ``dataset`` (row positions are 0-based)."""
    dataset.schema.check_splitter(config.splitter)
    n = dataset.n_rows
    if n < 2 * config.n_min:
        raise InsufficientDataError(
            f"{n} rows cannot hold two clusters of n_min={config.n_min}",
            n=n, n_min=config.n_min,
        )

    features = dataset.encoded()
    rows = split_matrix(dataset, config)
    metric = np.asarray(dataset.metric, dtype=float)
    root_stream = RngStream(seed=config.seed, stream_id=STREAM_SPLITTER)

    nodes: List[_Node] = [_Node(id=0, members=np.arange(n))]
    next_id = 1
    trace: List[FitStep] = []

    for iteration in range(config.max_iterations):
        target = None
        for node in nodes:
            if node.selected:
                continue
            if target is None or metric[node.members].std() > metric[target.members].std():
                target = node
        if target is None:
            logger.debug("[HBAC] every cluster has been selected; stopping at iteration %d", iteration)
            break
        target.selected = True

        values = metric[target.members]
        step = dict(iteration=iteration, cluster_id=target.id, parent_size=len(target.members),
                    parent_mean=float(values.mean()), parent_std=float(values.std()))

        if len(target.members) < 2 * config.n_min:
            trace.append(FitStep(outcome="too_small", **step))
            continue
        try:
            split = _split(rows[target.members], config, root_stream.child(iteration))
        except DegenerateSplitError as exc:
            trace.append(FitStep(outcome="degenerate", reason=exc.message, **step))
            continue

        children = [target.members[split.left], target.members[split.right]]
        sizes = [len(c) for c in children]
        means = [float(metric[c].mean()) for c in children]
        detail = dict(child_sizes=sizes, child_means=means)

        if min(sizes) < config.n_min:
            trace.append(FitStep(outcome="rejected_size", **detail, **step))
        elif not _accepts(step["parent_mean"], means):
            trace.append(FitStep(outcome="rejected_mean", **detail, **step))
        else:
            nodes.remove(target)
            ids = [next_id, next_id + 1]
            next_id += 2
            nodes.extend(_Node(id=i, members=c, parent_id=target.id) for i, c in zip(ids, children))
            trace.append(FitStep(outcome="accepted", child_ids=ids, **detail, **step))
        logger.debug("[HBAC] iteration %d: cluster %d (n=%d, std=%.4f) -> %s",
                     iteration, target.id, step["parent_size"], step["parent_std"], trace[-1].outcome)

    clusters = [_to_cluster(node, features, metric, config) for node in nodes]
    logger.info("[HBAC] %d rows -> %d clusters (n_min=%d, %d iterations)",
                n, len(clusters), config.n_min, len(trace))
    return Partition(
        clusters=clusters,
        config=config,
        feature_schema=dataset.schema,
        source_split=dataset_fingerprint(dataset),
        n_rows=n,
        trace=trace,
    )


def _to_cluster(node: _Node, features: np.ndarray, metric: np.ndarray, config: HbacConfig) -> Cluster:
    members = np.sort(node.members)
    block = features[members]
    if config.splitter == SplitterKind.KMODES:
        centroid = Centroid(kind="mode", values=column_modes(block.astype(int)).astype(float).tolist())
    else:
        centroid = Centroid(kind="mean", values=block.mean(axis=0).tolist())
    values = metric[members]
    return Cluster(
        id=node.id,
        parent_id=node.parent_id,
        member_indices=members.tolist(),
        centroid=centroid,
        metric_mean=float(values.mean()),
        metric_std=float(values.std()),
        ever_selected=node.selected,
    )
