"""
Dataset representation, feature schema, validation and one-hot expansion.

A ``Dataset`` keeps the raw feature table (pandas) next to the per-row bias
metric and optional ground-truth labels. Clustering never sees the table
directly: ``FeatureSchema.encode`` turns it into a float matrix where numeric
and binary columns keep their values and categorical columns become the index
of the value in the column's declared alphabet.
"""
import hashlib
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import SchemaMismatchError

logger = logging.getLogger(__name__)


class ColumnKind(str, Enum):
    NUMERIC = "numeric"
    BINARY = "binary"
    CATEGORICAL = "categorical"


class MetricKind(str, Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"


class SplitterKind(str, Enum):
    KMEANS = "kmeans"
    KMODES = "kmodes"


class ColumnSpec(BaseModel):
    """One feature column: its name, kind and (for categoricals) alphabet."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(..., min_length=1)
    kind: ColumnKind
    alphabet: Optional[List[str]] = None
    # set on columns produced by one_hot_expand
    source: Optional[str] = None
    level: Optional[str] = None

    @model_validator(mode="after")
    def _check_alphabet(self) -> "ColumnSpec":
        if self.kind == ColumnKind.CATEGORICAL:
            if not self.alphabet:
                raise ValueError(f"categorical column '{self.name}' needs a nonempty alphabet")
            if len(set(self.alphabet)) != len(self.alphabet):
                raise ValueError(f"categorical column '{self.name}' has duplicate alphabet entries")
        elif self.alphabet is not None:
            raise ValueError(f"only categorical columns take an alphabet ('{self.name}')")
        return self


class FeatureSchema(BaseModel):
    """
    Preprocessing contract for a dataset.

    Loaded from a JSON file of the form::

        {"columns": [{"name": "education", "kind": "categorical",
                      "alphabet": ["MBO12", "MBO34", "HBO", "WO"]}, ...],
         "metric_column": "high_risk", "metric_kind": "binary",
         "label_column": null}
    """

    model_config = ConfigDict(frozen=True)

    columns: List[ColumnSpec]
    metric_kind: MetricKind = MetricKind.CONTINUOUS
    metric_column: Optional[str] = None
    label_column: Optional[str] = None

    @field_validator("columns")
    @classmethod
    def _unique_names(cls, columns: List[ColumnSpec]) -> List[ColumnSpec]:
        names = [c.name for c in columns]
        if len(set(names)) != len(names):
            raise ValueError("column names must be unique")
        return columns

    @property
    def names(self) -> List[str]:
        return [c.name for c in self.columns]

    @property
    def arity(self) -> int:
        return len(self.columns)

    def has_kind(self, kind: ColumnKind) -> bool:
        return any(c.kind == kind for c in self.columns)

    def check_splitter(self, splitter: Union[SplitterKind, str]) -> None:
        """Numeric columns cannot be k-moded; categorical ones cannot be averaged."""
        splitter = SplitterKind(splitter)
        if splitter == SplitterKind.KMODES and self.has_kind(ColumnKind.NUMERIC):
            raise SchemaMismatchError(
                "k-modes splitting requires binary/categorical columns only",
                columns=[c.name for c in self.columns if c.kind == ColumnKind.NUMERIC],
            )
        if splitter == SplitterKind.KMEANS and self.has_kind(ColumnKind.CATEGORICAL):
            raise SchemaMismatchError(
                "k-means splitting requires numeric/binary columns; one-hot expand categoricals first",
                columns=[c.name for c in self.columns if c.kind == ColumnKind.CATEGORICAL],
            )

    def encode(self, frame: pd.DataFrame) -> np.ndarray:
        """Encode a conforming feature table as a float matrix (n × d)."""
        if list(frame.columns) != self.names:
            raise SchemaMismatchError(
                "feature columns do not match the schema",
                expected=self.names,
                found=[str(c) for c in frame.columns],
            )
        out = np.empty((len(frame), self.arity), dtype=float)
        for j, col in enumerate(self.columns):
            values = frame.iloc[:, j]
            if col.kind == ColumnKind.CATEGORICAL:
                codes = pd.Categorical(values.astype(str), categories=col.alphabet).codes
                if (codes < 0).any():
                    raise SchemaMismatchError(
                        f"column '{col.name}' holds values outside its alphabet", column=col.name
                    )
                out[:, j] = codes
            else:
                out[:, j] = pd.to_numeric(values, errors="raise").to_numpy(dtype=float)
        return out

    def encode_row(self, row: Union[Mapping[str, object], Sequence[object]]) -> np.ndarray:
        """Encode a single feature vector given as a mapping or positional sequence."""
        if isinstance(row, Mapping):
            missing = [n for n in self.names if n not in row]
            if missing:
                raise SchemaMismatchError("row is missing schema columns", missing=missing)
            values = [row[n] for n in self.names]
        else:
            values = list(row)
            if len(values) != self.arity:
                raise SchemaMismatchError(
                    f"row has arity {len(values)}, schema expects {self.arity}"
                )
        out = np.empty(self.arity, dtype=float)
        for j, (col, value) in enumerate(zip(self.columns, values)):
            if col.kind == ColumnKind.CATEGORICAL:
                if str(value) not in col.alphabet:
                    raise SchemaMismatchError(
                        f"value {value!r} not in alphabet of '{col.name}'", column=col.name
                    )
                out[j] = col.alphabet.index(str(value))
            else:
                try:
                    out[j] = float(value)
                except (TypeError, ValueError) as exc:
                    raise SchemaMismatchError(
                        f"value {value!r} of '{col.name}' is not numeric", column=col.name
                    ) from exc
                if col.kind == ColumnKind.BINARY and out[j] not in (0.0, 1.0):
                    raise SchemaMismatchError(
                        f"binary column '{col.name}' got {value!r}", column=col.name
                    )
        return out

    @classmethod
    def from_json_file(cls, path: Union[str, Path]) -> "FeatureSchema":
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class Dataset:
    """Feature rows x_i, per-row metric m_i and optional labels y_i."""

    features: pd.DataFrame
    metric: np.ndarray
    schema: FeatureSchema
    labels: Optional[np.ndarray] = None

    @property
    def n_rows(self) -> int:
        return len(self.features)

    def encoded(self) -> np.ndarray:
        return self.schema.encode(self.features)

    def subset(self, indices: Sequence[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=int)
        return Dataset(
            features=self.features.iloc[idx].reset_index(drop=True),
            metric=np.asarray(self.metric)[idx],
            schema=self.schema,
            labels=None if self.labels is None else np.asarray(self.labels)[idx],
        )

    def with_metric(self, metric: np.ndarray) -> "Dataset":
        return Dataset(features=self.features, metric=np.asarray(metric), schema=self.schema,
                       labels=self.labels)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

class Violation(BaseModel):
    code: str
    message: str
    column: Optional[str] = None
    count: Optional[int] = None


class ValidationResult(BaseModel):
    violations: List[Violation] = []

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> List[str]:
        return [v.code for v in self.violations]


def _is_binary(values: np.ndarray) -> np.ndarray:
    return (values == 0.0) | (values == 1.0)


def validate(dataset: Dataset) -> ValidationResult:
    """
    Check a dataset against its own schema.

    Violations are returned as data, never raised. Codes: ``empty_dataset``,
    ``length_mismatch``, ``schema_breach``, ``missing_value``,
    ``non_binary_metric``, ``non_finite_metric``, ``non_binary_label``.
    """
    violations: List[Violation] = []
    schema = dataset.schema
    n = dataset.n_rows
    metric = np.asarray(dataset.metric, dtype=float).ravel()

    if n == 0:
        violations.append(Violation(code="empty_dataset", message="dataset has no rows"))
    if len(metric) != n:
        violations.append(Violation(
            code="length_mismatch",
            message=f"length mismatch: {n} rows but {len(metric)} metric values",
        ))
    if dataset.labels is not None and len(dataset.labels) != n:
        violations.append(Violation(
            code="length_mismatch",
            message=f"length mismatch: {n} rows but {len(dataset.labels)} labels",
        ))

    present = [str(c) for c in dataset.features.columns]
    for name in schema.names:
        if name not in present:
            violations.append(Violation(code="schema_breach", column=name,
                                        message=f"schema column '{name}' is missing"))
    for name in present:
        if name not in schema.names:
            violations.append(Violation(code="schema_breach", column=name,
                                        message=f"unexpected column '{name}'"))
    if not violations and present != schema.names:
        violations.append(Violation(code="schema_breach",
                                    message="feature columns are not in schema order"))

    for col in schema.columns:
        if col.name not in present:
            continue
        values = dataset.features[col.name]
        n_missing = int(values.isna().sum())
        if n_missing:
            violations.append(Violation(code="missing_value", column=col.name, count=n_missing,
                                        message=f"column '{col.name}' has {n_missing} missing values"))
        observed = values.dropna()
        if col.kind == ColumnKind.CATEGORICAL:
            bad = int((~observed.astype(str).isin(col.alphabet)).sum())
            if bad:
                violations.append(Violation(
                    code="schema_breach", column=col.name, count=bad,
                    message=f"column '{col.name}' has {bad} values outside its alphabet"))
            continue
        numeric = pd.to_numeric(observed, errors="coerce").to_numpy(dtype=float)
        bad = int((~np.isfinite(numeric)).sum())
        if bad:
            violations.append(Violation(
                code="schema_breach", column=col.name, count=bad,
                message=f"column '{col.name}' has {bad} non-numeric values"))
        elif col.kind == ColumnKind.BINARY:
            bad = int((~_is_binary(numeric)).sum())
            if bad:
                violations.append(Violation(
                    code="schema_breach", column=col.name, count=bad,
                    message=f"binary column '{col.name}' has {bad} values outside {{0,1}}"))

    finite = np.isfinite(metric)
    if (~finite).any():
        violations.append(Violation(code="non_finite_metric", count=int((~finite).sum()),
                                    message="metric has missing or infinite values"))
    if schema.metric_kind == MetricKind.BINARY:
        bad = int((~_is_binary(metric[finite])).sum())
        if bad:
            violations.append(Violation(code="non_binary_metric", count=bad,
                                        message=f"non-binary metric: {bad} values outside {{0,1}}"))

    if dataset.labels is not None:
        labels = np.asarray(dataset.labels, dtype=float).ravel()
        bad = int((~_is_binary(labels)).sum())
        if bad:
            violations.append(Violation(code="non_binary_label", count=bad,
                                        message=f"{bad} labels outside {{0,1}}"))

    return ValidationResult(violations=violations)


# ---------------------------------------------------------------------------
# One-hot expansion
# ---------------------------------------------------------------------------

def one_hot_name(column: str, level: str) -> str:
    return f"{column}={level}"


def one_hot_expand(dataset: Dataset) -> Dataset:
    """
    Replace every categorical column with one binary column per alphabet entry.

    Expanded columns keep the position of their source column and remember it
    through ``ColumnSpec.source``/``level``. Metric and labels pass through.
    A schema without categorical columns is returned unchanged.
    """
    schema = dataset.schema
    if not schema.has_kind(ColumnKind.CATEGORICAL):
        return dataset

    new_columns: List[ColumnSpec] = []
    parts: Dict[str, pd.Series] = {}
    for col in schema.columns:
        values = dataset.features[col.name]
        if col.kind != ColumnKind.CATEGORICAL:
            new_columns.append(col)
            parts[col.name] = values.reset_index(drop=True)
            continue
        as_text = values.astype(str).reset_index(drop=True)
        for level in col.alphabet:
            name = one_hot_name(col.name, level)
            new_columns.append(ColumnSpec(name=name, kind=ColumnKind.BINARY,
                                          source=col.name, level=level))
            parts[name] = (as_text == level).astype(int)

    features = pd.DataFrame(parts, columns=[c.name for c in new_columns])
    expanded = schema.model_copy(update={"columns": new_columns})
    return Dataset(features=features, metric=dataset.metric, schema=expanded,
                   labels=dataset.labels)


def one_hot_groups(schema: FeatureSchema) -> Dict[str, List[ColumnSpec]]:
    """Expanded columns grouped by their source categorical column."""
    groups: Dict[str, List[ColumnSpec]] = {}
    for col in schema.columns:
        if col.source is not None:
            groups.setdefault(col.source, []).append(col)
    return groups


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------

def filter_rows(
    frame: pd.DataFrame,
    exclude: Optional[Mapping[str, Sequence[str]]] = None,
    drop_missing: bool = False,
) -> pd.DataFrame:
    """Explicit row filters applied before validation (no imputation)."""
    kept = frame
    for column, values in (exclude or {}).items():
        if column not in kept.columns:
            raise SchemaMismatchError(f"cannot filter on unknown column '{column}'", column=column)
        mask = kept[column].astype(str).isin([str(v) for v in values])
        if mask.any():
            logger.info("[INGEST] excluding %d rows with %s in %s", int(mask.sum()), column, list(values))
        kept = kept.loc[~mask]
    if drop_missing:
        before = len(kept)
        kept = kept.dropna()
        if len(kept) < before:
            logger.info("[INGEST] dropped %d rows with missing values", before - len(kept))
    return kept.reset_index(drop=True)


def load_csv(
    path: Union[str, Path],
    schema: FeatureSchema,
    exclude: Optional[Mapping[str, Sequence[str]]] = None,
    drop_missing: bool = False,
) -> Dataset:
    """
    Read a UTF-8, comma-separated CSV with a header row into a Dataset.

    Schema columns absent from the file are left out of the feature table so
    that ``validate`` reports them; only a missing metric column is fatal here.
    """
    if not schema.metric_column:
        raise SchemaMismatchError("schema does not name a metric column")
    categorical = {c.name: str for c in schema.columns if c.kind == ColumnKind.CATEGORICAL}
    frame = pd.read_csv(path, encoding="utf-8", dtype=categorical)
    if schema.metric_column not in frame.columns:
        raise SchemaMismatchError(f"metric column '{schema.metric_column}' not found in {path}",
                                  column=schema.metric_column)
    if schema.label_column and schema.label_column not in frame.columns:
        raise SchemaMismatchError(f"label column '{schema.label_column}' not found in {path}",
                                  column=schema.label_column)

    frame = filter_rows(frame, exclude=exclude, drop_missing=drop_missing)
    feature_names = [n for n in schema.names if n in frame.columns]
    metric = pd.to_numeric(frame[schema.metric_column], errors="coerce").to_numpy(dtype=float)
    labels = None
    if schema.label_column:
        labels = pd.to_numeric(frame[schema.label_column], errors="coerce").to_numpy(dtype=float)

    logger.info("[INGEST] %s: %d rows, %d feature columns", path, len(frame), len(feature_names))
    return Dataset(features=frame[feature_names].reset_index(drop=True), metric=metric,
                   schema=schema, labels=labels)


def dataset_fingerprint(dataset: Dataset) -> str:
    """
    Deterministic dataset ID.

    SHA-256 over the encoded feature matrix and the metric, truncated to 16 hex
    chars. Same data (and schema) → same ID on every run.
    """
    digest = hashlib.sha256()
    digest.update(",".join(dataset.schema.names).encode())
    digest.update(np.ascontiguousarray(dataset.encoded(), dtype=float).tobytes())
    digest.update(np.ascontiguousarray(dataset.metric, dtype=float).tobytes())
    return digest.hexdigest()[:16]
