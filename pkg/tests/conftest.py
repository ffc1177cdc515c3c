"""
Pytest configuration and fixtures
"""
import json

import numpy as np
import pandas as pd
import pytest

from src.core.config import DATA_DIR
from src.core.dataset import ColumnKind, ColumnSpec, Dataset, FeatureSchema, MetricKind
from src.duo.tables import load_tables


def numeric_schema(names, metric_kind=MetricKind.CONTINUOUS, metric_column="m", label_column=None):
    return FeatureSchema(
        columns=[ColumnSpec(name=n, kind=ColumnKind.NUMERIC) for n in names],
        metric_kind=metric_kind,
        metric_column=metric_column,
        label_column=label_column,
    )


def make_dataset(features, metric, metric_kind=MetricKind.CONTINUOUS, labels=None):
    """Numeric dataset with columns x0..x{d-1} from a 2-d array."""
    features = np.atleast_2d(np.asarray(features, dtype=float))
    names = [f"x{j}" for j in range(features.shape[1])]
    return Dataset(
        features=pd.DataFrame(features, columns=names),
        metric=np.asarray(metric, dtype=float),
        schema=numeric_schema(names, metric_kind),
        labels=None if labels is None else np.asarray(labels, dtype=float),
    )


def two_mass_frame(per_mass: int = 200) -> pd.DataFrame:
    """
    Two exact point masses, (0, 0) and (5, 5). The metric is 1 for 80% of the
    first mass and 10% of the second.
    """
    i = np.arange(per_mass)
    first = pd.DataFrame({"x0": 0.0, "x1": 0.0, "high_risk": (i % 10 < 8).astype(int)})
    second = pd.DataFrame({"x0": 5.0, "x1": 5.0, "high_risk": (i % 10 == 0).astype(int)})
    return pd.concat([first, second], ignore_index=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_mass_dataset():
    frame = two_mass_frame()
    return Dataset(
        features=frame[["x0", "x1"]],
        metric=frame["high_risk"].to_numpy(dtype=float),
        schema=numeric_schema(["x0", "x1"], MetricKind.BINARY, "high_risk"),
    )


@pytest.fixture
def audit_files(tmp_path):
    """CSV + schema file for the two-mass audit."""
    csv_path = tmp_path / "decisions.csv"
    two_mass_frame().to_csv(csv_path, index=False)
    schema_path = tmp_path / "schema.json"
    schema_path.write_text(json.dumps({
        "columns": [{"name": "x0", "kind": "numeric"}, {"name": "x1", "kind": "numeric"}],
        "metric_kind": "binary",
        "metric_column": "high_risk",
    }), encoding="utf-8")
    return {"input": csv_path, "schema": schema_path}


@pytest.fixture
def demo_tables():
    return load_tables(DATA_DIR / "r2_demo_table.csv")
