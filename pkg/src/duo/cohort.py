"""
Synthetic student cohorts for the end-to-end audit demo.

A cohort mix is a weighted list of components. Each field of a component is
either one value or a list of values drawn uniformly within the component.
Rows with an unknown distance are dropped before scoring, as in the real
audit.
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, field_validator, model_validator

from src.core.dataset import (
    ColumnKind,
    ColumnSpec,
    Dataset,
    FeatureSchema,
    MetricKind,
    one_hot_expand,
)
from src.core.rng import STREAM_COHORT, RngStream

from .scoring import StudentRecord, risk_score
from .tables import (
    AGE_BANDS,
    DISTANCE_BANDS,
    EDUCATION,
    R3_AGE_BANDS,
    UNKNOWN_DISTANCE,
    RiskTables,
)

logger = logging.getLogger(__name__)

RECORD_FIELDS = ("education", "age_current", "distance", "age_registered", "age_gba")
FEATURE_COLUMNS = ("education", "age", "distance")
METRIC_COLUMN = "high_risk"

Choice = Union[str, List[str]]

ALPHABETS = {
    "education": EDUCATION,
    "age_current": AGE_BANDS,
    "distance": DISTANCE_BANDS + (UNKNOWN_DISTANCE,),
    "age_registered": R3_AGE_BANDS,
    "age_gba": R3_AGE_BANDS,
}


class CohortComponent(BaseModel):
    weight: float = Field(..., gt=0.0)
    education: Choice
    age_current: Choice
    distance: Choice
    age_registered: Choice = "17-18"
    age_gba: Choice = "17-18"

    @field_validator("education", "age_current", "distance", "age_registered", "age_gba")
    @classmethod
    def _nonempty(cls, value: Choice) -> Choice:
        if isinstance(value, list) and not value:
            raise ValueError("choice lists must not be empty")
        return value

    def options(self, name: str) -> List[str]:
        value = getattr(self, name)
        return list(value) if isinstance(value, list) else [value]

    @model_validator(mode="after")
    def _valid_values(self) -> "CohortComponent":
        for name, alphabet in ALPHABETS.items():
            bad = [v for v in self.options(name) if v not in alphabet]
            if bad:
                raise ValueError(f"{name} values {bad} not in {list(alphabet)}")
        return self


class CohortMix(BaseModel):
    name: str = "cohort"
    n: Optional[int] = Field(default=None, ge=0)
    components: List[CohortComponent]

    @model_validator(mode="after")
    def _weights_sum_to_one(self) -> "CohortMix":
        total = sum(c.weight for c in self.components)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"component weights must sum to 1, got {total}")
        return self

    @classmethod
    def point_mass(cls, record: StudentRecord) -> "CohortMix":
        return cls(components=[CohortComponent(weight=1.0, **record.model_dump())])

    @classmethod
    def from_json_file(cls, path: Union[str, Path]) -> "CohortMix":
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))


def draw_records(n: int, mix: CohortMix, seed: int) -> pd.DataFrame:
    """``n`` raw records (one column per record field), deterministic per seed."""
    rng = RngStream(seed=seed, stream_id=STREAM_COHORT).generator()
    weights = np.array([c.weight for c in mix.components])
    component = rng.choice(len(mix.components), size=n, p=weights / weights.sum())
    columns: Dict[str, np.ndarray] = {name: np.empty(n, dtype=object) for name in RECORD_FIELDS}
    for index, comp in enumerate(mix.components):
        rows = np.flatnonzero(component == index)
        for name in RECORD_FIELDS:
            options = comp.options(name)
            if len(options) > 1:
                picks = rng.integers(len(options), size=len(rows))
            else:
                picks = np.zeros(len(rows), dtype=int)
            columns[name][rows] = np.asarray(options, dtype=object)[picks]
    return pd.DataFrame(columns, columns=list(RECORD_FIELDS))


def score_records(records: pd.DataFrame, tables: RiskTables) -> pd.DataFrame:
    """Append score, category and high_risk; rows with unknown distance are dropped."""
    known = records.loc[records["distance"] != UNKNOWN_DISTANCE].reset_index(drop=True)
    if len(known) < len(records):
        logger.info("[DUO] excluded %d records with unknown distance", len(records) - len(known))
    outcomes: Dict[Tuple[str, ...], tuple] = {}
    scores, categories, flags = [], [], []
    for values in known[list(RECORD_FIELDS)].itertuples(index=False, name=None):
        if values not in outcomes:
            out = risk_score(StudentRecord(**dict(zip(RECORD_FIELDS, values))), tables)
            outcomes[values] = (out.score, out.category, int(out.high_risk))
        score, category, flag = outcomes[values]
        scores.append(score)
        categories.append(category)
        flags.append(flag)
    return known.assign(score=scores, category=categories, high_risk=flags)


def cohort_schema() -> FeatureSchema:
    return FeatureSchema(
        columns=[
            ColumnSpec(name="education", kind=ColumnKind.CATEGORICAL, alphabet=list(EDUCATION)),
            ColumnSpec(name="age", kind=ColumnKind.CATEGORICAL, alphabet=list(AGE_BANDS)),
            ColumnSpec(name="distance", kind=ColumnKind.CATEGORICAL, alphabet=list(DISTANCE_BANDS)),
        ],
        metric_kind=MetricKind.BINARY,
        metric_column=METRIC_COLUMN,
    )


def cohort_dataset(scored: pd.DataFrame) -> Dataset:
    """Categorical cohort dataset (education/age/distance) with metric = high_risk."""
    features = pd.DataFrame({
        "education": scored["education"].astype(str),
        "age": scored["age_current"].astype(str),
        "distance": scored["distance"].astype(str),
    }, columns=list(FEATURE_COLUMNS))
    return Dataset(features=features, metric=scored[METRIC_COLUMN].to_numpy(dtype=float),
                   schema=cohort_schema())


def synth_cohort(n: int, mix: CohortMix, seed: int, tables: RiskTables) -> Dataset:
    """
    Draw, score and encode a cohort: 4 + 5 + 8 = 17 one-hot features and the
    binary high-risk metric.
    """
    scored = score_records(draw_records(n, mix, seed), tables)
    dataset = one_hot_expand(cohort_dataset(scored))
    logger.info("[DUO] synthesised %d records (%.1f%% high risk)", dataset.n_rows,
                100.0 * float(np.mean(dataset.metric)) if dataset.n_rows else 0.0)
    return dataset
