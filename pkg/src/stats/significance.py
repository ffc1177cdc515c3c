"""
Two-sample tests on the bias metric and the Bonferroni correction.
"""
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from src.core.errors import DegenerateTableError, DegenerateVarianceError, InsufficientSampleError

from .special import chi2_sf, student_t_two_sided


class StatResult(NamedTuple):
    statistic: float
    p_value: float
    df: Optional[float] = None


def welch_t_test(a: Sequence[float], b: Sequence[float]) -> StatResult:
    """
    Welch's unequal-variance t-test (two-sided).

    Sample variances use ddof=1; degrees of freedom follow Satterthwaite.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise InsufficientSampleError(
            f"Welch test needs at least 2 values per sample, got {len(a)} and {len(b)}",
            n_a=len(a), n_b=len(b),
        )
    var_a = a.var(ddof=1) / len(a)
    var_b = b.var(ddof=1) / len(b)
    if var_a == 0.0 and var_b == 0.0:
        raise DegenerateVarianceError("both samples have zero variance")
    se2 = var_a + var_b
    statistic = float((a.mean() - b.mean()) / np.sqrt(se2))
    df = float(se2 ** 2 / (var_a ** 2 / (len(a) - 1) + var_b ** 2 / (len(b) - 1)))
    return StatResult(statistic, student_t_two_sided(statistic, df), df)


def contingency_table(a: Sequence[float], b: Sequence[float]) -> np.ndarray:
    """2×2 counts: rows are the groups (a, b), columns the metric (1, 0)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ones = [float((a == 1).sum()), float((b == 1).sum())]
    return np.array([[ones[0], len(a) - ones[0]], [ones[1], len(b) - ones[1]]])


def chi2_test(a: Sequence[float], b: Sequence[float]) -> StatResult:
    """Pearson χ² test of independence on the 2×2 table, without continuity correction."""
    table = contingency_table(a, b)
    rows = table.sum(axis=1)
    cols = table.sum(axis=0)
    if (rows == 0).any() or (cols == 0).any():
        raise DegenerateTableError("contingency table has a zero margin", table=table.tolist())
    expected = np.outer(rows, cols) / table.sum()
    statistic = float(((table - expected) ** 2 / expected).sum())
    return StatResult(statistic, chi2_sf(statistic, 1.0), 1.0)


def bonferroni(p_values: Sequence[float], k: int) -> List[float]:
    """min(1, k·p) for each p."""
    if k < 1:
        raise ValueError(f"Bonferroni factor must be at least 1, got {k}")
    out = []
    for p in p_values:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p-value outside [0, 1]: {p}")
        out.append(min(1.0, k * p))
    return out
