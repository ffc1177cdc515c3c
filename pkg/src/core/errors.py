"""
Error hierarchy shared by every stage of the audit.

All domain failures derive from ``AuditError`` (a ``ValueError``) so callers that
only care about "bad input" can keep catching ``ValueError``. The CLI maps
``AuditError`` to exit status 1 and anything else to 2.
"""
from typing import Any, Dict, List, Optional


class AuditError(ValueError):
    """Base class for data/usage errors raised by the audit toolkit."""

    code = "audit_error"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_record(self) -> Dict[str, Any]:
        """Machine-readable error record (written to error.json by the CLI)."""
        record: Dict[str, Any] = {"error": self.code, "message": self.message}
        if self.details:
            record["details"] = self.details
        return record


class DegenerateSplitError(AuditError):
    code = "degenerate_split"


class InsufficientDataError(AuditError):
    code = "insufficient_data"


class SchemaMismatchError(AuditError):
    code = "schema_mismatch"


class UndefinedScoreError(AuditError):
    code = "undefined_score"


class InfeasibleGridError(AuditError):
    code = "infeasible_grid"


class InsufficientSampleError(AuditError):
    code = "insufficient_sample"


class DegenerateVarianceError(AuditError):
    code = "degenerate_variance"


class DegenerateTableError(AuditError):
    code = "degenerate_table"


class DomainError(AuditError):
    code = "domain_error"


class TrainerFailureError(AuditError):
    code = "trainer_failure"


class SingleClassError(AuditError):
    code = "single_class"


class MissingTableEntryError(AuditError):
    code = "missing_table_entry"


class UnknownDistanceError(AuditError):
    code = "unknown_distance"


class OutOfRangeError(AuditError):
    code = "out_of_range"


class CampaignFailure(AuditError):
    """A simulation broke an invariant; ``details`` names the simulation and seed."""

    code = "campaign_failure"


class ValidationFailed(AuditError):
    """Dataset validation produced violations; the pipeline stops before fitting."""

    code = "validation_failed"

    def __init__(self, message: str, violations: Optional[List[Dict[str, Any]]] = None):
        super().__init__(message, violations=violations or [])
        self.violations = violations or []
