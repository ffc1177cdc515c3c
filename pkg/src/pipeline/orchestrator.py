"""
Audit graph - Fan-Out/Fan-In over the cross-validation folds
"""
from typing import Any, Dict, Optional

from langgraph.graph import END, START, StateGraph

from src.core.dataset import Dataset

from .evaluation import evaluate_fold_node, fit_node, report_node, select_node, test_node
from .preparation import encode_node, ingest_node, split_node, validate_node
from .router import route_after_validate, route_to_folds
from .state import AuditConfig, AuditState


def create_audit_graph():
    """
    ingest → validate → (END on violations) → encode → split → evaluate_fold × (n_min, fold)
    → select → fit → test → report
    """
    workflow = StateGraph(AuditState)

    # ===== NODES =====
    workflow.add_node("ingest", ingest_node)
    workflow.add_node("validate", validate_node)
    workflow.add_node("encode", encode_node)
    workflow.add_node("split", split_node)
    workflow.add_node("evaluate_fold", evaluate_fold_node)
    workflow.add_node("select", select_node)
    workflow.add_node("fit", fit_node)
    workflow.add_node("test", test_node)
    workflow.add_node("report", report_node)

    # ===== EDGES =====
    workflow.add_edge(START, "ingest")
    workflow.add_edge("ingest", "validate")
    workflow.add_conditional_edges("validate", route_after_validate, ["encode", END])
    workflow.add_edge("encode", "split")

    # Split → dynamic fan-out to fold evaluations (or straight to the join)
    workflow.add_conditional_edges("split", route_to_folds, ["evaluate_fold", "select"])

    # All fold evaluations → Select (fan-in)
    workflow.add_edge("evaluate_fold", "select")
    workflow.add_edge("select", "fit")
    workflow.add_edge("fit", "test")
    workflow.add_edge("test", "report")
    workflow.add_edge("report", END)

    return workflow.compile()


def run_audit(config: AuditConfig, dataset: Optional[Dataset] = None) -> Dict[str, Any]:
    """
    Run the whole audit and return the final state.

    Validation failures end the graph early: ``state["validation"].ok`` is
    False and no report is present. Other data errors propagate as
    ``AuditError``.
    """
    graph = create_audit_graph()
    initial_state: AuditState = {
        "config": config,
        "dataset": dataset,
        "fold_scores": [],
        "errors": [],
        "current_phase": "started",
    }
    return graph.invoke(initial_state)
