"""
Distribution functions for exact p-values, built on scipy's regularized
incomplete beta and gamma functions.
"""
import math

from scipy import special

from src.core.errors import DomainError


def _check_df(df: float) -> None:
    if not df > 0 or math.isnan(df):
        raise DomainError(f"degrees of freedom must be positive, got {df}", df=df)


def student_t_two_sided(x: float, df: float) -> float:
    """P(|T| ≥ |x|) for Student's t with ``df`` degrees of freedom."""
    _check_df(df)
    if math.isnan(x):
        return float("nan")
    return float(special.betainc(df / 2.0, 0.5, df / (df + x * x)))


def student_t_cdf(x: float, df: float) -> float:
    """P(T ≤ x)."""
    half_tail = 0.5 * student_t_two_sided(x, df)
    return 1.0 - half_tail if x > 0 else half_tail


def student_t_sf(x: float, df: float) -> float:
    """P(T > x)."""
    return student_t_cdf(-x, df)


def chi2_sf(x: float, df: float) -> float:
    """Upper tail P(X ≥ x) of a χ² variable with ``df`` degrees of freedom."""
    _check_df(df)
    if x <= 0:
        return 1.0
    return float(special.gammaincc(df / 2.0, x / 2.0))
