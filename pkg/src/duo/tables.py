"""
Risk tables of the CUB risk-profiling rules.

score = R1[education] × (R2[age, distance] + R3[current age, age at
registration, age at GBA registration]). R1 and R3 are built in; R2 is read
from a CSV file (header row of distance bands, one row per age band).
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple, Union

import pandas as pd

from src.core.errors import MissingTableEntryError, SchemaMismatchError

logger = logging.getLogger(__name__)

EDUCATION = ("MBO12", "MBO34", "HBO", "WO")
AGE_BANDS = ("15-18", "19-20", "21-22", "23-24", "25-50")
DISTANCE_BANDS = ("0km", "1m-1km", "1-2km", "2-5km", "5-10km", "10-20km", "20-50km", "50-500km")
UNKNOWN_DISTANCE = "unknown"

# age bands used by the R3 lookup
R3_AGE_BANDS = ("15-16", "17-18", "19-20", "21-22", "23-24", "25-65")
CURRENT_AGE_TO_R3 = {"19-20": "19-20", "21-22": "21-22", "23-24": "23-24", "25-50": "25-65"}

R1_FACTORS: Dict[str, float] = {"MBO12": 1.2, "MBO34": 1.1, "HBO": 1.0, "WO": 0.8}

# (current age, age at registration, age at GBA registration) -> R3
R3_ENTRIES: Dict[Tuple[str, str, str], float] = {
    ("21-22", "17-18", "17-18"): 5,
    ("21-22", "17-18", "19-20"): 0,
    ("21-22", "19-20", "19-20"): 0,
    ("23-24", "17-18", "17-18"): 15,
    ("23-24", "17-18", "19-20"): 10,
    ("23-24", "17-18", "21-22"): 0,
    ("25-65", "17-18", "17-18"): 30,
    ("25-65", "17-18", "19-20"): 25,
    ("25-65", "17-18", "21-22"): 15,
    ("25-65", "17-18", "23-24"): 0,
    ("25-65", "17-18", "25-65"): 0,
    ("25-65", "19-20", "19-20"): 25,
    ("25-65", "19-20", "21-22"): 0,
    ("25-65", "19-20", "23-24"): 0,
    ("25-65", "19-20", "25-65"): 0,
    ("25-65", "21-22", "21-22"): 15,
    ("25-65", "21-22", "23-24"): 0,
    ("25-65", "23-24", "23-24"): 0,
}

MAX_SCORE = 180.0


@dataclass(frozen=True)
class RiskTables:
    """R1, R2 and R3 lookups. Unlisted R3 triples are 0."""

    r2: Mapping[Tuple[str, str], float]
    r1: Mapping[str, float] = field(default_factory=lambda: dict(R1_FACTORS))
    r3: Mapping[Tuple[str, str, str], float] = field(default_factory=lambda: dict(R3_ENTRIES))

    def r1_value(self, education: str) -> float:
        try:
            return self.r1[education]
        except KeyError:
            raise MissingTableEntryError(f"no R1 factor for education '{education}'",
                                         table="r1", key=education) from None

    def r2_value(self, age: str, distance: str) -> float:
        try:
            return self.r2[(age, distance)]
        except KeyError:
            raise MissingTableEntryError(f"no R2 entry for age {age}, distance {distance}",
                                         table="r2", key=[age, distance]) from None

    def r3_value(self, age_current: str, age_registered: str, age_gba: str) -> float:
        current = CURRENT_AGE_TO_R3.get(age_current, age_current)
        return self.r3.get((current, age_registered, age_gba), 0.0)


def load_r2_table(path: Union[str, Path]) -> Dict[Tuple[str, str], float]:
    """Read the R2 grid: first column age band, remaining columns distance bands."""
    frame = pd.read_csv(path, index_col=0, comment="#")
    frame.index = frame.index.astype(str).str.strip()
    frame.columns = [str(c).strip() for c in frame.columns]
    unknown = [c for c in frame.columns if c not in DISTANCE_BANDS]
    if unknown:
        raise SchemaMismatchError(f"R2 table has unknown distance bands {unknown}", path=str(path))
    values = frame.apply(pd.to_numeric, errors="coerce")
    if values.isna().any().any():
        raise SchemaMismatchError("R2 table has empty or non-numeric cells", path=str(path))
    if (values < 0).any().any():
        raise SchemaMismatchError("R2 table has negative cells", path=str(path))
    return {(age, dist): float(values.loc[age, dist]) for age in values.index for dist in values.columns}


def load_r1_table(path: Union[str, Path]) -> Dict[str, float]:
    """Override file for R1: columns ``education,factor``."""
    frame = pd.read_csv(path, dtype={"education": str})
    return {str(row.education): float(row.factor) for row in frame.itertuples(index=False)}


def load_r3_table(path: Union[str, Path]) -> Dict[Tuple[str, str, str], float]:
    """Override file for R3: columns ``age_current,age_registered,age_gba,value``."""
    frame = pd.read_csv(path, dtype=str)
    return {
        (row.age_current, row.age_registered, row.age_gba): float(row.value)
        for row in frame.itertuples(index=False)
    }


def load_tables(
    r2_path: Union[str, Path],
    r1_path: Optional[Union[str, Path]] = None,
    r3_path: Optional[Union[str, Path]] = None,
) -> RiskTables:
    if not Path(r2_path).exists():
        raise MissingTableEntryError(f"R2 table not found: {r2_path}", table="r2", path=str(r2_path))
    tables = RiskTables(
        r2=load_r2_table(r2_path),
        r1=load_r1_table(r1_path) if r1_path else dict(R1_FACTORS),
        r3=load_r3_table(r3_path) if r3_path else dict(R3_ENTRIES),
    )
    logger.info("[DUO] loaded R2 table %s (%d cells)", r2_path, len(tables.r2))
    return tables
