"""
Routing - stop on invalid data, fan the cross-validation out per (n_min, fold)
"""
import logging
from typing import List, Union

from langgraph.graph import END
from langgraph.types import Send

from .state import AuditState

logger = logging.getLogger(__name__)


def route_after_validate(state: AuditState) -> str:
    validation = state.get("validation")
    if validation is not None and validation.ok:
        return "encode"
    return END


def route_to_folds(state: AuditState) -> Union[List[Send], str]:
    """
    One ``evaluate_fold`` task per feasible candidate and fold. With no
    feasible candidate the join runs directly and reports the empty grid.
    """
    feasible = state.get("feasible", [])
    if not feasible:
        return "select"
    config = state["config"]
    base = config.hbac_config()
    train = state["train"]
    sends = [
        Send("evaluate_fold", {
            "train": train,
            "train_idx": train_idx,
            "held_idx": held_idx,
            "n_min": n_min,
            "fold": fold,
            "base_config": base,
        })
        for n_min in feasible
        for fold, (train_idx, held_idx) in enumerate(state["fold_pairs"])
    ]
    logger.info("[SELECT] fanning out %d fold evaluations", len(sends))
    return sends
