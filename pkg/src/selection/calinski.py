"""
Calinski-Harabasz index of a clustering, computed on the scalar bias metric.
"""
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.core.errors import UndefinedScoreError


class ChScore(BaseModel):
    """
    CH value for ``k`` clusters over ``n`` rows.

    ``infinite`` marks a zero within-cluster sum of squares (``value`` is then
    0.0 and meaningless). ``degenerate`` marks a held-out assignment that
    produced fewer than two clusters; such scores rank as 0.
    """

    model_config = ConfigDict(frozen=True)

    value: float = Field(default=0.0, ge=0.0)
    infinite: bool = False
    degenerate: bool = False
    k: int
    n: int

    @property
    def score(self) -> float:
        return float("inf") if self.infinite else self.value


def calinski_harabasz(metric_values: Sequence[float], assignment: Sequence[int]) -> ChScore:
    """[SS_between/(k−1)] / [SS_within/(n−k)] of the metric under ``assignment``."""
    metric = np.asarray(metric_values, dtype=float).ravel()
    labels = np.asarray(assignment).ravel()
    if len(metric) != len(labels):
        raise ValueError(f"{len(metric)} metric values but {len(labels)} assignments")
    n = len(metric)
    groups, inverse, counts = np.unique(labels, return_inverse=True, return_counts=True)
    k = len(groups)
    if k < 2 or n <= k:
        raise UndefinedScoreError(f"CH index undefined for k={k}, n={n}", k=k, n=n)

    sums = np.bincount(inverse, weights=metric, minlength=k)
    means = sums / counts
    grand = metric.mean()
    ss_between = float((counts * (means - grand) ** 2).sum())
    ss_within = float(((metric - means[inverse]) ** 2).sum())
    if ss_within == 0.0:
        return ChScore(infinite=True, k=k, n=n)
    return ChScore(value=(ss_between / (k - 1)) / (ss_within / (n - k)), k=k, n=n)
