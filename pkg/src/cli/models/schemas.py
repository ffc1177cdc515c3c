"""
Pydantic models for CLI requests
"""
from typing import Literal, Optional

from pydantic import BaseModel, Field

from src.core.config import settings
from src.simulation.campaign import Experiment
from src.simulation.generate import Scenario


class SimulateRequest(BaseModel):
    """One simulation campaign"""
    experiment: Experiment
    scenario: Scenario = Scenario.CONSTANT
    k: int = Field(default=5, ge=2, description="number of generating clusters")
    n: int = Field(default=1000, ge=2, description="rows per simulated dataset")
    d: int = Field(default=2, ge=1, description="feature dimension")
    mu_scale: float = Field(default=1.0, gt=0.0, description="cluster means from U(-mu_scale, mu_scale)")
    sims: int = Field(default_factory=lambda: settings.n_sims, ge=1)
    n_perm: int = Field(default_factory=lambda: settings.n_perm, ge=19)
    alpha: float = Field(default_factory=lambda: settings.alpha, gt=0.0, lt=1.0)
    seed: int = Field(default_factory=lambda: settings.audit_seed, ge=0)
    workers: int = Field(default_factory=lambda: settings.workers, ge=1)
    output_dir: Optional[str] = None


class DuoDemoRequest(BaseModel):
    """Synthetic cohort scored by the risk-profiling replica, then audited"""
    cohort: str = Field(default_factory=lambda: settings.cohort_config_path)
    r2_table: str = Field(default_factory=lambda: settings.r2_table_path)
    n: Optional[int] = Field(default=None, ge=0, description="overrides the cohort file's n")
    seed: int = Field(default_factory=lambda: settings.audit_seed, ge=0)
    grid_preset: Optional[Literal["cub2014", "cub2019"]] = None
    output_dir: Optional[str] = None
    xlsx: bool = False


class AssignRequest(BaseModel):
    """Assignment-only run against a saved partition"""
    partition: str
    input: str
    schema_path: str
    output: str
