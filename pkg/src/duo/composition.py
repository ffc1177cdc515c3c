"""
Which cluster each (education, age, distance) combination falls into.
"""
import itertools

import numpy as np
import pandas as pd

from src.clustering.partition import Partition, assign_all
from src.core.dataset import Dataset, one_hot_expand

from .cohort import FEATURE_COLUMNS, cohort_schema
from .tables import AGE_BANDS, DISTANCE_BANDS, EDUCATION


def all_combinations() -> pd.DataFrame:
    """The 4 × 5 × 8 = 160 characteristic combinations, in alphabet order."""
    rows = list(itertools.product(EDUCATION, AGE_BANDS, DISTANCE_BANDS))
    return pd.DataFrame(rows, columns=list(FEATURE_COLUMNS))


def combination_map(partition: Partition) -> pd.DataFrame:
    """
    Assign every combination to exactly one cluster by centroid distance.

    Columns: education, age, distance, cluster (0-based position).
    """
    combos = all_combinations()
    categorical = Dataset(features=combos, metric=np.zeros(len(combos)), schema=cohort_schema())
    cluster = assign_all(partition, one_hot_expand(categorical))
    return combos.assign(cluster=cluster)
