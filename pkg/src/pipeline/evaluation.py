"""
Evaluation nodes - Fold scoring, n_min selection, Fit, Test and Report
"""
import logging
from typing import Any, Dict

import numpy as np

from src.clustering.hbac import fit_hbac
from src.clustering.partition import assign_all
from src.core.dataset import dataset_fingerprint
from src.selection.cv import evaluate_fold, summarize_selection
from src.stats.clusters import test_assignment

from .report import build_report
from .state import AuditState

logger = logging.getLogger(__name__)


def evaluate_fold_node(task: Dict[str, Any]) -> Dict[str, Any]:
    """One (n_min, fold) cell; ``task`` is the payload built by ``route_to_folds``."""
    score = evaluate_fold(task["train"], task["train_idx"], task["held_idx"],
                          task["n_min"], task["base_config"], task["fold"])
    return {"fold_scores": [score]}


def select_node(state: AuditState) -> Dict[str, Any]:
    """Join the fold scores; arrival order does not matter."""
    config = state["config"]
    selection = summarize_selection(state["grid"], state.get("feasible", []), config.folds,
                                    config.seed, state.get("fold_scores", []))
    return {"selection": selection, "current_phase": "selected"}


def fit_node(state: AuditState) -> Dict[str, Any]:
    config = state["config"]
    partition = fit_hbac(state["train"], config.hbac_config(state["selection"].chosen))
    return {"partition": partition, "current_phase": "fitted"}


def test_node(state: AuditState) -> Dict[str, Any]:
    """Assign the held-out rows by centroid and test every cluster on them."""
    config = state["config"]
    partition = state["partition"]
    test = state["test"]
    labels = assign_all(partition, test) if partition.k > 1 else np.zeros(test.n_rows, dtype=int)
    report = test_assignment(partition, labels, test.metric, test.schema.metric_kind,
                             alpha=config.alpha, correction=config.correction,
                             split_info=state["split"].summary())
    return {"test_report": report, "test_labels": labels, "current_phase": "tested"}


def report_node(state: AuditState) -> Dict[str, Any]:
    report = build_report(
        config=state["config"].echo(),
        dataset=state["encoded"],
        train=state["train"],
        split=state["split"],
        selection=state["selection"],
        partition=state["partition"],
        tests=state["test_report"],
        data_fingerprint=dataset_fingerprint(state["encoded"]),
    )
    logger.info("[AUDIT] %d clusters, significant: %s",
                len(report.clusters), report.tests.significant_clusters() or "none")
    return {"report": report, "current_phase": "complete"}
