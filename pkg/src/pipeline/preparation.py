"""
Preparation nodes - Ingest, Validate, Encode and Split
"""
import logging
from typing import Any, Dict

import pandas as pd
from pydantic import ValidationError as PydanticValidationError

from src.core.dataset import (
    ColumnKind,
    FeatureSchema,
    SplitterKind,
    Violation,
    dataset_fingerprint,
    load_csv,
    one_hot_expand,
    validate,
)
from src.core.errors import ValidationFailed
from src.core.sampling import fold_blocks, split_sample
from src.selection.cv import feasible_candidates, resolve_grid

from .state import AuditState

logger = logging.getLogger(__name__)


def _unreadable(what: str, path: str, exc: Exception) -> ValidationFailed:
    violation = Violation(code="unreadable_input", message=f"{what} {path}: {exc}")
    return ValidationFailed(f"cannot read {what} {path}", [violation.model_dump()])


def ingest_node(state: AuditState) -> Dict[str, Any]:
    """
    Load the input CSV against its schema file. A dataset already present in
    the state (synthetic cohorts, tests) passes through untouched.
    """
    if state.get("dataset") is not None:
        logger.info("[INGEST] using supplied dataset (%d rows)", state["dataset"].n_rows)
        return {"current_phase": "ingested"}

    config = state["config"]
    if not config.input_path or not config.schema_path:
        violation = Violation(code="missing_input", message="both an input CSV and a schema file are needed")
        raise ValidationFailed(violation.message, [violation.model_dump()])
    try:
        schema = FeatureSchema.from_json_file(config.schema_path)
    except (OSError, PydanticValidationError) as exc:
        raise _unreadable("schema", config.schema_path, exc) from exc
    if config.metric_column:
        schema = schema.model_copy(update={"metric_column": config.metric_column})
    try:
        dataset = load_csv(config.input_path, schema, exclude=config.exclude,
                           drop_missing=config.drop_missing)
    except (OSError, UnicodeDecodeError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise _unreadable("input", config.input_path, exc) from exc
    return {"dataset": dataset, "current_phase": "ingested"}


def validate_node(state: AuditState) -> Dict[str, Any]:
    result = validate(state["dataset"])
    if result.ok:
        logger.info("[VALIDATE] %d rows passed", state["dataset"].n_rows)
        return {"validation": result, "current_phase": "validated"}
    for violation in result.violations:
        logger.warning("[VALIDATE] %s: %s", violation.code, violation.message)
    return {
        "validation": result,
        "errors": [v.model_dump() for v in result.violations],
        "current_phase": "invalid",
    }


def encode_node(state: AuditState) -> Dict[str, Any]:
    """One-hot expand categoricals for k-means; k-modes works on the codes directly."""
    config = state["config"]
    dataset = state["dataset"]
    needs_expansion = config.one_hot and config.splitter == SplitterKind.KMEANS
    if needs_expansion and dataset.schema.has_kind(ColumnKind.CATEGORICAL):
        dataset = one_hot_expand(dataset)
        logger.info("[ENCODE] one-hot expanded to %d columns", dataset.schema.arity)
    dataset.schema.check_splitter(config.splitter)
    return {"encoded": dataset, "current_phase": "encoded"}


def split_node(state: AuditState) -> Dict[str, Any]:
    """Hold out the test rows, then lay out the grid and folds on the training rows."""
    config = state["config"]
    dataset = state["encoded"]
    split = split_sample(dataset.n_rows, config.test_fraction, config.seed)
    train = dataset.subset(split.train)
    test = dataset.subset(split.test)

    grid = config.resolve_grid_values() or resolve_grid(train.n_rows, config.grid_fractions)
    pairs = fold_blocks(train.n_rows, config.folds, config.seed)
    feasible = feasible_candidates(grid, pairs)
    logger.info("[SPLIT] %d train / %d test rows (data %s); grid %s, feasible %s",
                train.n_rows, test.n_rows, dataset_fingerprint(dataset), grid, feasible)
    return {
        "split": split,
        "train": train,
        "test": test,
        "grid": grid,
        "feasible": feasible,
        "fold_pairs": pairs,
        "current_phase": "split",
    }
