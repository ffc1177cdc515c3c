"""
Audit report: the machine-readable model and its human-readable rendering.

The per-cluster table uses the column layout of a published risk-profiling
audit: cluster size, metric inside and outside the cluster,
their difference, and the raw and Bonferroni-adjusted p-values.
"""
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

from src import __version__
from src.clustering.partition import Partition
from src.core.dataset import Dataset, MetricKind, one_hot_groups
from src.core.sampling import SplitIndices
from src.selection.cv import SelectionResult
from src.stats.clusters import TestReport

logger = logging.getLogger(__name__)

TOOL_NAME = "hbac-audit"
P_FLOOR = 1e-16


class Provenance(BaseModel):
    tool: str = TOOL_NAME
    version: str = __version__
    seed: int
    data_fingerprint: str
    train_fingerprint: str
    n_rows: int
    n_train: int
    n_test: int


class ClusterSummary(BaseModel):
    cluster_index: int
    cluster_id: int
    size: int
    metric_mean: float
    metric_std: float
    centroid: List[float]
    # source column -> level -> percentage of the cluster's rows
    composition: Dict[str, Dict[str, float]] = {}


class AuditReport(BaseModel):
    provenance: Provenance
    config: Dict[str, Any]
    feature_names: List[str]
    metric_column: str
    metric_kind: MetricKind
    selection: SelectionResult
    clusters: List[ClusterSummary]
    population: Dict[str, Dict[str, float]] = {}
    tests: TestReport
    notes: List[str] = []

    @property
    def metric_label(self) -> str:
        return metric_label(self.metric_column)


def metric_label(column: str) -> str:
    """``high_risk`` -> ``High risk``"""
    text = column.replace("_", " ").strip() or "metric"
    return text[0].upper() + text[1:]


def composition(dataset: Dataset, members: Optional[List[int]] = None) -> Dict[str, Dict[str, float]]:
    """Share (%) of rows in every level of each one-hot expanded characteristic."""
    groups = one_hot_groups(dataset.schema)
    if not groups:
        return {}
    frame = dataset.features if members is None else dataset.features.iloc[members]
    if frame.empty:
        return {source: {col.level: 0.0 for col in cols} for source, cols in groups.items()}
    return {
        source: {col.level: 100.0 * float(frame[col.name].mean()) for col in cols}
        for source, cols in groups.items()
    }


def report_notes(report_tests: TestReport) -> List[str]:
    notes = [
        "Clusters were fitted on the training split only; every p-value is computed on "
        f"the {report_tests.n_test} held-out rows, assigned to their nearest centroid.",
    ]
    if report_tests.metric_kind == MetricKind.BINARY:
        notes.append("Two-sided Pearson chi-squared test (1 df) of each cluster against the "
                     "rest of the test set, without Yates continuity correction.")
    else:
        notes.append("Two-sided Welch t-test of each cluster against the rest of the test set.")
    if report_tests.correction == "bonferroni":
        notes.append(f"P-value (Bonferroni) = min(1, k * p) over the k = {report_tests.n_tested} "
                     f"testable clusters; significant means adjusted p <= {report_tests.alpha:g}.")
    else:
        notes.append(f"No multiple-comparison correction; significant means raw p <= "
                     f"{report_tests.alpha:g}.")
    untestable = [t for t in report_tests.tests if not t.testable]
    if untestable:
        listed = ", ".join(f"{t.cluster_index} ({t.reason})" for t in untestable)
        notes.append(f"Untestable clusters, kept in the table: {listed}.")
    if not report_tests.tests:
        notes.append("HBAC returned a single cluster; there is nothing to test.")
    return notes


def build_report(
    config: Dict[str, Any],
    dataset: Dataset,
    train: Dataset,
    split: SplitIndices,
    selection: SelectionResult,
    partition: Partition,
    tests: TestReport,
    data_fingerprint: str,
) -> AuditReport:
    clusters = [
        ClusterSummary(
            cluster_index=position,
            cluster_id=cluster.id,
            size=cluster.size,
            metric_mean=cluster.metric_mean,
            metric_std=cluster.metric_std,
            centroid=list(cluster.centroid.values),
            composition=composition(train, cluster.member_indices),
        )
        for position, cluster in enumerate(partition.clusters)
    ]
    return AuditReport(
        provenance=Provenance(
            seed=int(config["seed"]),
            data_fingerprint=data_fingerprint,
            train_fingerprint=partition.source_split,
            n_rows=dataset.n_rows,
            n_train=len(split.train),
            n_test=len(split.test),
        ),
        config=config,
        feature_names=dataset.schema.names,
        metric_column=dataset.schema.metric_column,
        metric_kind=dataset.schema.metric_kind,
        selection=selection,
        clusters=clusters,
        population=composition(train),
        tests=tests,
        notes=report_notes(tests),
    )


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def format_p(p: Optional[float]) -> str:
    if p is None:
        return "-"
    if p < P_FLOOR:
        return f"<{P_FLOOR:g}"
    return f"{p:.4g}"


def _number(value: Optional[float], scale: float) -> str:
    return "-" if value is None else f"{scale * value:.2f}"


def tests_frame(report: AuditReport) -> pd.DataFrame:
    """The per-cluster test table with its display column names."""
    label = report.metric_label
    binary = report.metric_kind == MetricKind.BINARY
    scale = 100.0 if binary else 1.0
    if binary:
        inside, outside, diff = f"{label} (%) in cluster", f"{label} (%) outside cluster", "Difference (%)"
    else:
        inside, outside, diff = f"Mean {label} in cluster", f"Mean {label} outside cluster", "Difference"

    rows = []
    for test in report.tests.tests:
        row = {
            "Cluster": test.cluster_index,
            "n in cluster": test.n_in,
            inside: _number(test.mean_in, scale),
            outside: _number(test.mean_out, scale),
            diff: _number(test.difference, scale),
            "P-value (raw)": format_p(test.p_raw) if test.testable else f"untestable ({test.reason})",
        }
        if report.tests.correction == "bonferroni":
            row["P-value (Bonferroni)"] = format_p(test.p_adjusted)
        row["Significant"] = "yes" if test.significant else "no"
        rows.append(row)
    return pd.DataFrame(rows)


def composition_frame(report: AuditReport) -> pd.DataFrame:
    """Cluster size and characteristics per cluster, with the training population as reference."""
    def characteristics(values: Dict[str, Dict[str, float]], centroid: Optional[List[float]]) -> Dict[str, Any]:
        if values:
            return {f"{source}: {level} (%)": round(share, 2)
                    for source, levels in values.items() for level, share in levels.items()}
        if centroid is None:
            return {}
        return {name: round(v, 4) for name, v in zip(report.feature_names, centroid)}

    binary = report.metric_kind == MetricKind.BINARY
    scale = 100.0 if binary else 1.0
    metric_col = f"{report.metric_label} (%)" if binary else f"Mean {report.metric_label}"
    rows = []
    for cluster in report.clusters:
        rows.append({
            "Cluster": str(cluster.cluster_index),
            "Cluster size": cluster.size,
            metric_col: round(scale * cluster.metric_mean, 2),
            **characteristics(cluster.composition, cluster.centroid),
        })
    if report.population:
        n_train = report.provenance.n_train
        train_mean = sum(c.metric_mean * c.size for c in report.clusters) / max(n_train, 1)
        rows.append({
            "Cluster": "All",
            "Cluster size": n_train,
            metric_col: round(scale * train_mean, 2),
            **characteristics(report.population, None),
        })
    return pd.DataFrame(rows)


def render_text(report: AuditReport) -> str:
    prov = report.provenance
    selection = report.selection
    lines = [
        f"HBAC bias audit ({prov.tool} {prov.version})",
        f"data {prov.data_fingerprint}, seed {prov.seed}, {prov.n_rows} rows "
        f"({prov.n_train} train / {prov.n_test} test)",
        f"n_min {selection.chosen} chosen from grid {selection.grid} by {selection.folds}-fold "
        f"cross-validation; {len(report.clusters)} clusters",
        "",
        "Testing the difference in bias metric per cluster",
    ]
    table = tests_frame(report)
    lines.append(table.to_string(index=False) if not table.empty else "(no clusters to test)")
    lines += ["", "Cluster size and characteristics", composition_frame(report).to_string(index=False)]
    lines += ["", "Notes"] + [f"- {note}" for note in report.notes]
    return "\n".join(lines) + "\n"


def write_xlsx(report: AuditReport, path: Union[str, Path]) -> None:
    with pd.ExcelWriter(path, engine="openpyxl") as writer:
        tests_frame(report).to_excel(writer, sheet_name="tests", index=False)
        composition_frame(report).to_excel(writer, sheet_name="clusters", index=False)
    logger.info("[AUDIT] wrote %s", path)


def assignments_frame(split: SplitIndices, partition: Partition, test_labels: np.ndarray,
                      metric: np.ndarray) -> pd.DataFrame:
    """
    One row per input row: fit membership for training rows, nearest-centroid
    assignment for held-out rows.
    """
    cluster = np.full(split.n, -1, dtype=int)
    side = np.empty(split.n, dtype=object)
    cluster[split.train] = partition.fit_labels()
    side[split.train] = "train"
    if len(split.test):
        cluster[split.test] = test_labels
        side[split.test] = "test"
    return pd.DataFrame({
        "row_id": np.arange(split.n),
        "split": side,
        "cluster": cluster,
        "metric": np.asarray(metric, dtype=float),
    })
