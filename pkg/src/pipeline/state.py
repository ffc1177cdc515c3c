"""
State definitions for the audit graph
"""
from operator import add
from typing import Annotated, Any, Dict, List, Literal, Optional, TypedDict

import numpy as np
from pydantic import BaseModel, Field, model_validator

from src.clustering.partition import HbacConfig, Partition
from src.core.config import settings
from src.core.dataset import Dataset, SplitterKind, ValidationResult
from src.core.sampling import SplitIndices
from src.selection.cv import GRID_PRESETS, FoldScore, SelectionResult
from src.stats.clusters import TestReport


class AuditConfig(BaseModel):
    """Everything one audit run depends on; echoed into the report for replay."""

    input_path: Optional[str] = None
    schema_path: Optional[str] = None
    metric_column: Optional[str] = None
    splitter: SplitterKind = SplitterKind.KMEANS

    # n_min grid: absolute values win over a preset, a preset over fractions
    grid: Optional[List[int]] = None
    grid_preset: Optional[Literal["cub2014", "cub2019"]] = None
    grid_fractions: List[float] = Field(default_factory=lambda: list(settings.n_min_fractions))

    folds: int = Field(default_factory=lambda: settings.folds, ge=2)
    test_fraction: float = Field(default_factory=lambda: settings.test_fraction, gt=0.0, lt=1.0)
    alpha: float = Field(default_factory=lambda: settings.alpha, gt=0.0, lt=1.0)
    correction: Literal["bonferroni", "none"] = "bonferroni"
    seed: int = Field(default_factory=lambda: settings.audit_seed, ge=0)
    max_iterations: int = Field(default_factory=lambda: settings.max_iterations, ge=1)
    metric_weight: float = Field(default=0.0, ge=0.0)

    one_hot: bool = True
    exclude: Dict[str, List[str]] = Field(default_factory=dict)
    drop_missing: bool = False

    output_dir: Optional[str] = None
    xlsx: bool = False

    @model_validator(mode="after")
    def _check_grid(self) -> "AuditConfig":
        if self.grid is not None and (not self.grid or min(self.grid) < 1):
            raise ValueError("grid values must be positive integers")
        if any(not 0.0 < f < 1.0 for f in self.grid_fractions):
            raise ValueError("grid fractions must lie in (0, 1)")
        return self

    def resolve_grid_values(self) -> Optional[List[int]]:
        """Absolute grid if one was given (directly or by preset); None means fractions."""
        if self.grid is not None:
            return sorted(set(self.grid))
        if self.grid_preset is not None:
            return list(GRID_PRESETS[self.grid_preset])
        return None

    def hbac_config(self, n_min: int = 1) -> HbacConfig:
        return HbacConfig(
            n_min=n_min,
            max_iterations=self.max_iterations,
            splitter=self.splitter,
            seed=self.seed,
            metric_weight=self.metric_weight,
            max_sweeps=settings.splitter_max_sweeps,
        )

    def echo(self) -> Dict[str, Any]:
        """Config as embedded in reports (output location excluded so reruns match)."""
        return self.model_dump(mode="json", exclude={"output_dir", "xlsx"})


class AuditState(TypedDict, total=False):
    """Main state for the audit graph"""

    # ===== INPUTS =====
    config: AuditConfig
    dataset: Optional[Dataset]

    # ===== VALIDATION & ENCODING =====
    validation: ValidationResult
    encoded: Dataset

    # ===== SPLIT =====
    split: SplitIndices
    train: Dataset
    test: Dataset
    grid: List[int]
    feasible: List[int]
    fold_pairs: List[tuple]

    # ===== MODEL SELECTION =====
    # Accumulated from parallel fold nodes via add operator
    fold_scores: Annotated[List[FoldScore], add]
    selection: SelectionResult

    # ===== FIT & TEST =====
    partition: Partition
    test_report: TestReport
    test_labels: np.ndarray

    # ===== OUTPUT =====
    report: Any
    errors: Annotated[List[dict], add]
    current_phase: str

