"""
Fitted partition types and centroid-based assignment of rows.
"""
from typing import List, Literal, Mapping, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.core.dataset import Dataset, FeatureSchema, SplitterKind
from src.core.errors import SchemaMismatchError


class HbacConfig(BaseModel):
    """Settings of one HBAC fit."""

    model_config = ConfigDict(frozen=True)

    n_min: int = Field(..., ge=1)
    max_iterations: int = Field(default=1000, ge=1)
    splitter: SplitterKind = SplitterKind.KMEANS
    seed: int = Field(default=0, ge=0)
    # weight of the bias metric as an extra splitting coordinate (0 = features only)
    metric_weight: float = Field(default=0.0, ge=0.0)
    max_sweeps: int = Field(default=100, ge=1)


class Centroid(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["mean", "mode"]
    values: List[float]


class Cluster(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: int
    parent_id: Optional[int] = None
    member_indices: List[int]
    centroid: Centroid
    metric_mean: float
    metric_std: float = Field(..., ge=0.0)
    ever_selected: bool = False

    @property
    def size(self) -> int:
        return len(self.member_indices)


class FitStep(BaseModel):
    """One HBAC iteration: which cluster was selected and what happened to it."""

    iteration: int
    cluster_id: int
    parent_size: int
    parent_mean: float
    parent_std: float
    outcome: Literal["accepted", "rejected_mean", "rejected_size", "degenerate", "too_small"]
    child_ids: List[int] = []
    child_sizes: List[int] = []
    child_means: List[float] = []
    reason: Optional[str] = None


class Partition(BaseModel):
    """
    HBAC output: clusters in creation order, plus everything needed to assign
    unseen rows (centroids and the encoded feature schema).
    """

    clusters: List[Cluster]
    config: HbacConfig
    feature_schema: FeatureSchema
    source_split: str
    n_rows: int
    trace: List[FitStep] = []

    @property
    def k(self) -> int:
        return len(self.clusters)

    @property
    def sizes(self) -> List[int]:
        return [c.size for c in self.clusters]

    @property
    def centroid_kind(self) -> str:
        return "mode" if self.config.splitter == SplitterKind.KMODES else "mean"

    def centroid_matrix(self) -> np.ndarray:
        return np.array([c.centroid.values for c in self.clusters], dtype=float)

    def fit_labels(self) -> np.ndarray:
        """Cluster position of every fit row."""
        labels = np.full(self.n_rows, -1, dtype=int)
        for position, cluster in enumerate(self.clusters):
            labels[cluster.member_indices] = position
        return labels

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Partition":
        return cls.model_validate_json(text)


def nearest_centroid(rows: np.ndarray, centroids: np.ndarray, kind: str) -> np.ndarray:
    """
    Position of the nearest centroid per row: squared Euclidean for means,
    Hamming for modes. ``argmin`` returns the first minimum, so ties go to the
    lowest cluster position.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    distances = np.empty((len(rows), len(centroids)), dtype=float)
    for j, centre in enumerate(centroids):
        if kind == "mode":
            distances[:, j] = (rows != centre).sum(axis=1)
        else:
            diff = rows - centre
            distances[:, j] = np.einsum("ij,ij->i", diff, diff)
    return np.argmin(distances, axis=1)


def assign(partition: Partition, row: Union[Mapping[str, object], Sequence[object]]) -> int:
    """Cluster position of a single feature vector."""
    encoded = partition.feature_schema.encode_row(row)
    return int(nearest_centroid(encoded, partition.centroid_matrix(), partition.centroid_kind)[0])


def assign_all(partition: Partition, dataset: Dataset) -> np.ndarray:
    """Vectorised ``assign`` over every row of ``dataset``."""
    if dataset.schema.names != partition.feature_schema.names:
        raise SchemaMismatchError(
            "dataset columns do not match the partition's feature schema",
            expected=partition.feature_schema.names,
            found=dataset.schema.names,
        )
    if dataset.n_rows == 0:
        return np.empty(0, dtype=int)
    rows = partition.feature_schema.encode(dataset.features)
    return nearest_centroid(rows, partition.centroid_matrix(), partition.centroid_kind)
