"""
Centralized configuration management using Pydantic Settings
"""
from functools import lru_cache
from pathlib import Path
from typing import List

from pydantic_settings import BaseSettings, SettingsConfigDict

# Shipped demo inputs live next to the package
DATA_DIR = Path(__file__).resolve().parent.parent / "data"


class Settings(BaseSettings):
    """Audit defaults loaded from environment variables (or .env)"""

    # Reproducibility
    audit_seed: int = 42

    # Audit procedure
    test_fraction: float = 0.2
    alpha: float = 0.05
    folds: int = 5
    n_min_fractions: List[float] = [0.02, 0.04, 0.08, 0.12]
    max_iterations: int = 1000
    splitter_max_sweeps: int = 100

    # Simulation campaigns
    l2_penalty: float = 1e-4
    n_perm: int = 1000
    n_sims: int = 1000
    workers: int = 1

    # Files
    output_dir: str = "outputs"
    r2_table_path: str = str(DATA_DIR / "r2_demo_table.csv")
    cohort_config_path: str = str(DATA_DIR / "demo_cohort.json")

    # Diagnostics
    log_level: str = "INFO"

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    settings = Settings()

    if not 0.0 < settings.test_fraction < 1.0:
        raise ValueError(
            f"TEST_FRACTION must lie strictly between 0 and 1, got {settings.test_fraction}.\n"
            "  TEST_FRACTION=0.2"
        )
    if not 0.0 < settings.alpha < 1.0:
        raise ValueError(
            f"ALPHA must lie strictly between 0 and 1, got {settings.alpha}.\n"
            "  ALPHA=0.05"
        )
    if settings.folds < 2:
        raise ValueError(f"FOLDS must be at least 2, got {settings.folds}.")
    if any(not 0.0 < f < 1.0 for f in settings.n_min_fractions):
        raise ValueError(
            "N_MIN_FRACTIONS entries must lie in (0, 1), e.g.\n"
            '  N_MIN_FRACTIONS=[0.02, 0.04, 0.08, 0.12]'
        )

    return settings


settings = get_settings()
