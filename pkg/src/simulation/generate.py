"""
Synthetic clustered data for the simulation study.

Cluster k has feature mean mu_k (the same in every coordinate, mu_k ~ U(-1, 1))
and unit covariance. The bias metric is Gaussian around eta_k, or labels are
Bernoulli(p_k); eta_k and p_k are constant (scenario ``constant``) or rise
linearly with k (scenario ``linear``).
"""
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core.dataset import ColumnKind, ColumnSpec, Dataset, FeatureSchema, MetricKind
from src.core.sampling import holdout_size


class Scenario(str, Enum):
    CONSTANT = "constant"
    LINEAR = "linear"


class LabelMode(str, Enum):
    DIRECT_METRIC = "direct_metric"
    BERNOULLI_LABELS = "bernoulli_labels"


class SimConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    k_clusters: int = Field(default=5, ge=2)
    n_total: int = Field(default=1000, ge=2)
    d: int = Field(default=2, ge=1)
    scenario: Scenario = Scenario.CONSTANT
    mu_scale: float = Field(default=1.0, gt=0.0)
    label_mode: LabelMode = LabelMode.DIRECT_METRIC
    seed: int = Field(default=0, ge=0)

    test_fraction: float = Field(default=0.2, gt=0.0, lt=1.0)
    n_min: Optional[int] = Field(default=None, ge=1)
    metric_weight: Optional[float] = Field(default=None, ge=0.0)
    max_iterations: int = Field(default=1000, ge=1)
    l2_penalty: float = Field(default=1e-4, ge=0.0)
    n_perm: int = Field(default=1000, ge=19)
    probability_metric: bool = False
    refit_partition: bool = False

    @model_validator(mode="after")
    def _check_divisible(self) -> "SimConfig":
        if self.n_total % self.k_clusters:
            raise ValueError(
                f"n_total={self.n_total} must be divisible by k_clusters={self.k_clusters}"
            )
        return self

    @property
    def n_per_cluster(self) -> int:
        return self.n_total // self.k_clusters

    @property
    def n_train(self) -> int:
        return self.n_total - holdout_size(self.n_total, self.test_fraction)

    def resolved_n_min(self) -> int:
        if self.n_min is not None:
            return self.n_min
        return max(1, self.n_train // (2 * self.k_clusters))

    def resolved_metric_weight(self) -> float:
        if self.metric_weight is not None:
            return self.metric_weight
        return 1.0 if self.label_mode == LabelMode.DIRECT_METRIC else 0.0


class ClusterParams(BaseModel):
    mu: float
    eta: float
    p: float = Field(..., ge=0.0, le=1.0)


def eta_values(k_clusters: int, scenario: Scenario) -> List[float]:
    if Scenario(scenario) == Scenario.CONSTANT:
        return [0.0] * k_clusters
    return [-1.0 + 2.0 * k / (k_clusters - 1) for k in range(k_clusters)]


def p_values(k_clusters: int, scenario: Scenario) -> List[float]:
    if Scenario(scenario) == Scenario.CONSTANT:
        return [0.5] * k_clusters
    return [0.1 + 0.8 * k / (k_clusters - 1) for k in range(k_clusters)]


def draw_params(config: SimConfig, rng: np.random.Generator) -> List[ClusterParams]:
    """μ_k ~ U(−mu_scale, mu_scale); η_k and p_k follow the scenario."""
    mu = config.mu_scale * rng.uniform(-1.0, 1.0, size=config.k_clusters)
    eta = eta_values(config.k_clusters, config.scenario)
    p = p_values(config.k_clusters, config.scenario)
    return [ClusterParams(mu=float(mu[k]), eta=eta[k], p=p[k]) for k in range(config.k_clusters)]


def gen_features(
    config: SimConfig, params: List[ClusterParams], rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """Feature matrix (N × d) in cluster blocks, and the true cluster of each row."""
    n_k = config.n_per_cluster
    blocks = [rng.normal(loc=cp.mu, scale=1.0, size=(n_k, config.d)) for cp in params]
    cluster_ids = np.repeat(np.arange(config.k_clusters), n_k)
    return np.vstack(blocks), cluster_ids


def gen_metric(
    config: SimConfig, params: List[ClusterParams], cluster_ids: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    if config.label_mode != LabelMode.DIRECT_METRIC:
        raise ValueError("gen_metric requires label_mode=direct_metric")
    eta = np.array([cp.eta for cp in params])
    return rng.normal(loc=eta[cluster_ids], scale=1.0)


def gen_labels(
    config: SimConfig, params: List[ClusterParams], cluster_ids: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    if config.label_mode != LabelMode.BERNOULLI_LABELS:
        raise ValueError("gen_labels requires label_mode=bernoulli_labels")
    p = np.array([cp.p for cp in params])
    return (rng.random(len(cluster_ids)) < p[cluster_ids]).astype(int)


@dataclass(frozen=True)
class SimulatedData:
    features: np.ndarray
    cluster_ids: np.ndarray
    params: List[ClusterParams]
    metric: Optional[np.ndarray] = None
    labels: Optional[np.ndarray] = None


def simulate(config: SimConfig, rng: np.random.Generator) -> SimulatedData:
    """Draw parameters, features, then the metric or the labels (in that order)."""
    params = draw_params(config, rng)
    features, cluster_ids = gen_features(config, params, rng)
    if config.label_mode == LabelMode.DIRECT_METRIC:
        return SimulatedData(features, cluster_ids, params,
                             metric=gen_metric(config, params, cluster_ids, rng))
    return SimulatedData(features, cluster_ids, params,
                         labels=gen_labels(config, params, cluster_ids, rng))


def numeric_schema(d: int, metric_kind: MetricKind = MetricKind.CONTINUOUS) -> FeatureSchema:
    return FeatureSchema(
        columns=[ColumnSpec(name=f"x{j}", kind=ColumnKind.NUMERIC) for j in range(d)],
        metric_kind=metric_kind,
        metric_column="m",
    )


def to_dataset(features: np.ndarray, metric: np.ndarray, labels: Optional[np.ndarray] = None) -> Dataset:
    schema = numeric_schema(features.shape[1])
    frame = pd.DataFrame(features, columns=schema.names)
    return Dataset(features=frame, metric=np.asarray(metric, dtype=float), schema=schema, labels=labels)
