"""
Command implementations behind the CLI

Every command writes into a temporary sibling of its output directory and
moves its files into place only after all of them exist. Only files named in
``OWNED_FILES`` are ever replaced or removed; anything else in the directory
is left alone.
"""
import logging
import os
import shutil
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Union

import pandas as pd

from src.clustering.partition import Partition, assign_all
from src.core.config import settings
from src.core.dataset import ColumnKind, Dataset, FeatureSchema, load_csv, one_hot_expand, validate
from src.core.errors import SchemaMismatchError, ValidationFailed
from src.duo.cohort import CohortMix, synth_cohort
from src.duo.composition import combination_map
from src.duo.tables import load_tables
from src.pipeline.orchestrator import run_audit
from src.pipeline.report import AuditReport, assignments_frame, render_text, write_xlsx
from src.pipeline.state import AuditConfig
from src.simulation.campaign import CampaignResult, run_campaign, write_campaign
from src.simulation.generate import SimConfig

from .models.schemas import AssignRequest, DuoDemoRequest, SimulateRequest

logger = logging.getLogger(__name__)

AUDIT_FILES = ("report.json", "report.txt", "partition.json", "assignments.csv", "report.xlsx")
CAMPAIGN_FILES = ("summary.json", "records.csv", "figure_table.csv")
OWNED_FILES = frozenset(AUDIT_FILES + CAMPAIGN_FILES + ("combination_map.csv", "error.json"))


def default_output_dir(command: str, experiment: Optional[str] = None) -> Path:
    """Per-command directory under ``settings.output_dir``; commands never share one."""
    base = Path(settings.output_dir)
    if command == "simulate":
        return base / f"simulate-{experiment}"
    return base / command


def clear_outputs(directory: Union[str, Path]) -> List[Path]:
    """Remove the files hbac-audit owns from ``directory``; returns what was removed."""
    directory = Path(directory)
    removed = []
    if not directory.is_dir():
        return removed
    for name in sorted(OWNED_FILES):
        path = directory / name
        if path.is_file():
            path.unlink()
            removed.append(path)
    return removed


@contextmanager
def staged_output(target: Union[str, Path]) -> Iterator[Path]:
    """Yield a scratch directory whose files replace the owned files of ``target`` on success."""
    target = Path(target)
    if target.exists() and not target.is_dir():
        raise NotADirectoryError(f"output path exists and is not a directory: {target}")
    target.parent.mkdir(parents=True, exist_ok=True)
    scratch = Path(tempfile.mkdtemp(prefix=f".{target.name}.", dir=target.parent))
    try:
        yield scratch
        produced = sorted(p.name for p in scratch.iterdir())
        unknown = [name for name in produced if name not in OWNED_FILES]
        if unknown:
            raise RuntimeError(f"refusing to publish unowned output files: {unknown}")
    except BaseException:
        shutil.rmtree(scratch, ignore_errors=True)
        raise
    if not target.exists():
        os.replace(scratch, target)
        return
    clear_outputs(target)
    for name in produced:
        os.replace(scratch / name, target / name)
    scratch.rmdir()


def audit_state(config: AuditConfig, dataset: Optional[Dataset] = None) -> Dict[str, Any]:
    """Run the audit graph; a dataset that fails validation raises ``ValidationFailed``."""
    state = run_audit(config, dataset)
    validation = state.get("validation")
    if validation is not None and not validation.ok:
        raise ValidationFailed(
            f"dataset failed validation: {', '.join(validation.codes())}",
            [v.model_dump() for v in validation.violations],
        )
    return state


def write_audit_outputs(state: Dict[str, Any], directory: Path, xlsx: bool = False) -> List[Path]:
    report: AuditReport = state["report"]
    files = {
        "report.json": report.model_dump_json(indent=2),
        "report.txt": render_text(report),
        "partition.json": state["partition"].to_json(),
    }
    written = []
    for name, text in files.items():
        path = directory / name
        path.write_text(text, encoding="utf-8")
        written.append(path)

    assignments = assignments_frame(state["split"], state["partition"], state["test_labels"],
                                    state["encoded"].metric)
    assignments.to_csv(directory / "assignments.csv", index=False)
    written.append(directory / "assignments.csv")
    if xlsx:
        write_xlsx(report, directory / "report.xlsx")
        written.append(directory / "report.xlsx")
    return written


def cmd_audit(config: AuditConfig) -> AuditReport:
    state = audit_state(config)
    target = Path(config.output_dir or default_output_dir("audit"))
    with staged_output(target) as scratch:
        write_audit_outputs(state, scratch, config.xlsx)
    logger.info("[AUDIT] report written to %s", target)
    return state["report"]


def cmd_simulate(request: SimulateRequest) -> CampaignResult:
    config = SimConfig(k_clusters=request.k, n_total=request.n, d=request.d,
                       mu_scale=request.mu_scale, scenario=request.scenario, seed=request.seed,
                       n_perm=request.n_perm,
                       l2_penalty=settings.l2_penalty, max_iterations=settings.max_iterations)
    result = run_campaign(request.experiment, config, n_sims=request.sims, alpha=request.alpha,
                          seed=request.seed, workers=request.workers)
    target = Path(request.output_dir or default_output_dir("simulate", request.experiment.value))
    with staged_output(target) as scratch:
        write_campaign(result, scratch)
    logger.info("[CAMPAIGN] results written to %s", target)
    return result


def cmd_duo_demo(request: DuoDemoRequest) -> AuditReport:
    """Score a synthetic cohort with the replica rules and audit the high-risk flag."""
    tables = load_tables(request.r2_table)
    mix = CohortMix.from_json_file(request.cohort)
    n = request.n if request.n is not None else mix.n
    if n is None:
        raise ValidationFailed("cohort size unset: pass --n or set n in the cohort file")
    dataset = synth_cohort(n, mix, request.seed, tables)

    config = AuditConfig(splitter="kmodes", seed=request.seed, grid_preset=request.grid_preset,
                         output_dir=request.output_dir, xlsx=request.xlsx)
    state = audit_state(config, dataset)
    target = Path(request.output_dir or default_output_dir("duo-demo"))
    with staged_output(target) as scratch:
        write_audit_outputs(state, scratch, request.xlsx)
        combination_map(state["partition"]).to_csv(scratch / "combination_map.csv", index=False)
    logger.info("[DUO] report written to %s", target)
    return state["report"]


def cmd_assign(request: AssignRequest) -> pd.DataFrame:
    """Assign every row of a CSV to the nearest centroid of a saved partition."""
    partition = Partition.from_json(Path(request.partition).read_text(encoding="utf-8"))
    schema = FeatureSchema.from_json_file(request.schema_path)
    dataset = load_csv(request.input, schema)
    result = validate(dataset)
    if not result.ok:
        raise ValidationFailed(f"dataset failed validation: {', '.join(result.codes())}",
                               [v.model_dump() for v in result.violations])
    if dataset.schema.names != partition.feature_schema.names and schema.has_kind(ColumnKind.CATEGORICAL):
        dataset = one_hot_expand(dataset)
    if dataset.schema.names != partition.feature_schema.names:
        raise SchemaMismatchError("input columns do not match the partition's feature schema",
                                  expected=partition.feature_schema.names, found=dataset.schema.names)

    frame = pd.DataFrame({
        "row_id": range(dataset.n_rows),
        "cluster": assign_all(partition, dataset),
        "metric": dataset.metric,
    })
    output = Path(request.output)
    output.parent.mkdir(parents=True, exist_ok=True)
    scratch = output.with_name(f".{output.name}.tmp")
    frame.to_csv(scratch, index=False)
    os.replace(scratch, output)
    logger.info("[ASSIGN] %d rows assigned to %d clusters -> %s", dataset.n_rows, partition.k, output)
    return frame
