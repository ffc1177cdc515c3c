"""
The audit pipeline as a LangGraph state graph
"""
from .orchestrator import create_audit_graph, run_audit
from .report import AuditReport, render_text
from .state import AuditConfig, AuditState
