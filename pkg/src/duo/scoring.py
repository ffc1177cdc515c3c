"""
Risk score, risk category and the high-risk flag for one student.
"""
import logging
import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from src.core.errors import OutOfRangeError, UnknownDistanceError

from .tables import MAX_SCORE, UNKNOWN_DISTANCE, RiskTables

logger = logging.getLogger(__name__)

Education = Literal["MBO12", "MBO34", "HBO", "WO"]
AgeBand = Literal["15-18", "19-20", "21-22", "23-24", "25-50"]
Distance = Literal["0km", "1m-1km", "1-2km", "2-5km", "5-10km", "10-20km", "20-50km",
                   "50-500km", "unknown"]
R3AgeBand = Literal["15-16", "17-18", "19-20", "21-22", "23-24", "25-65"]

HIGH_RISK_CATEGORIES = (1, 2)


class StudentRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    education: Education
    age_current: AgeBand
    distance: Distance
    age_registered: R3AgeBand = "17-18"
    age_gba: R3AgeBand = "17-18"


class RiskOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    score: float = Field(..., ge=0.0, le=MAX_SCORE)
    category: int = Field(..., ge=1, le=6)
    high_risk: bool
    clamped: bool = False


def categorize(score: float) -> int:
    """
    Risk category of a score in [0, 180].

    0 → 6, then [1, 20) → 5, [20, 40) → 4, [40, 60) → 3, [60, 80) → 2 and
    [80, 180] → 1. Scores are rounded to 9 decimals first so that products like
    1.2 × 35 land on their integer value; fractional scores in (0, 1) fall in 5.
    """
    if score is None or math.isnan(score):
        raise OutOfRangeError("risk score is not a number")
    value = round(float(score), 9)
    if value < 0.0 or value > MAX_SCORE:
        raise OutOfRangeError(f"risk score {score} outside [0, {MAX_SCORE:g}]", score=score)
    if value == 0.0:
        return 6
    if value < 20.0:
        return 5
    if value < 40.0:
        return 4
    if value < 60.0:
        return 3
    if value < 80.0:
        return 2
    return 1


def risk_score(record: StudentRecord, tables: RiskTables) -> RiskOutcome:
    """R1 × (R2 + R3), binned; scores above 180 are clamped with a warning."""
    if record.distance == UNKNOWN_DISTANCE:
        raise UnknownDistanceError("distance to parents is unknown; the row is excluded upstream",
                                   record=record.model_dump())
    r1 = tables.r1_value(record.education)
    r2 = tables.r2_value(record.age_current, record.distance)
    r3 = tables.r3_value(record.age_current, record.age_registered, record.age_gba)
    score = round(r1 * (r2 + r3), 9)
    clamped = score > MAX_SCORE
    if clamped:
        logger.warning("[DUO] risk score %.3f for %s exceeds %g; clamped",
                       score, record.model_dump(), MAX_SCORE)
        score = MAX_SCORE
    category = categorize(score)
    return RiskOutcome(score=score, category=category,
                       high_risk=category in HIGH_RISK_CATEGORIES, clamped=clamped)
