"""
hbac-audit command line

    hbac-audit audit --input data.csv --schema schema.json [options]
    hbac-audit simulate {insample_vs_oos,bonferroni_effect,perm_vs_t,accuracy_perm} [options]
    hbac-audit duo-demo [--cohort mix.json] [--r2-table r2.csv] [--n N] [--seed S]
    hbac-audit assign --partition partition.json --input data.csv --schema schema.json --output out.csv

The schema file is JSON:

    {"columns": [{"name": "age", "kind": "numeric"},
                 {"name": "education", "kind": "categorical", "alphabet": ["HBO", "WO"]}],
     "metric_kind": "binary", "metric_column": "high_risk"}

Exit status: 0 when every output was written, 1 for data errors (the record
goes to error.json in the output directory and as one JSON line on stderr),
2 for usage and internal errors.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError as PydanticValidationError

from src import __version__
from src.core.config import settings
from src.core.dataset import SplitterKind
from src.core.errors import AuditError
from src.pipeline.report import render_text
from src.pipeline.state import AuditConfig
from src.simulation.campaign import Experiment
from src.simulation.generate import Scenario

from .commands import clear_outputs, cmd_assign, cmd_audit, cmd_duo_demo, cmd_simulate, default_output_dir
from .models.schemas import AssignRequest, DuoDemoRequest, SimulateRequest

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DATA_ERROR = 1
EXIT_INTERNAL_ERROR = 2


def _exclusion(text: str) -> tuple:
    column, sep, value = text.partition("=")
    if not sep or not column:
        raise argparse.ArgumentTypeError(f"expected COLUMN=VALUE, got '{text}'")
    return column, value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hbac-audit",
                                     description="Unsupervised bias detection with HBAC")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=settings.log_level,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    audit = sub.add_parser("audit", help="audit a CSV of decisions for biased clusters")
    audit.add_argument("--input", required=True, help="CSV with a header row")
    audit.add_argument("--schema", required=True, help="feature schema (JSON)")
    audit.add_argument("--metric-column", help="overrides the schema's metric column")
    audit.add_argument("--splitter", choices=[k.value for k in SplitterKind], default="kmeans")
    grid = audit.add_mutually_exclusive_group()
    grid.add_argument("--grid", type=int, nargs="+", help="absolute n_min candidates")
    grid.add_argument("--grid-fractions", type=float, nargs="+",
                      help="n_min candidates as fractions of the training rows")
    grid.add_argument("--grid-preset", choices=["cub2014", "cub2019"])
    audit.add_argument("--folds", type=int, default=settings.folds)
    audit.add_argument("--test-fraction", type=float, default=settings.test_fraction)
    audit.add_argument("--alpha", type=float, default=settings.alpha)
    audit.add_argument("--correction", choices=["bonferroni", "none"], default="bonferroni")
    audit.add_argument("--max-iterations", type=int, default=settings.max_iterations)
    audit.add_argument("--metric-weight", type=float, default=0.0,
                       help="weight of the metric as an extra splitting coordinate")
    audit.add_argument("--seed", type=int, default=settings.audit_seed)
    audit.add_argument("--exclude", type=_exclusion, nargs="+", default=[], metavar="COL=VALUE",
                       help="drop rows where COL equals VALUE before validation")
    audit.add_argument("--drop-missing", action="store_true",
                       help="drop rows with missing values instead of failing validation")
    audit.add_argument("--output-dir", help="defaults to OUTPUT_DIR/audit")
    audit.add_argument("--xlsx", action="store_true", help="also write report.xlsx")

    simulate = sub.add_parser("simulate", help="run a simulation campaign")
    simulate.add_argument("experiment", choices=[e.value for e in Experiment])
    simulate.add_argument("--scenario", choices=[s.value for s in Scenario], default="constant")
    simulate.add_argument("--k", type=int, default=5)
    simulate.add_argument("--n", type=int, default=1000)
    simulate.add_argument("--d", type=int, default=2)
    simulate.add_argument("--mu-scale", type=float, default=1.0,
                          help="cluster means drawn from U(-MU_SCALE, MU_SCALE)")
    simulate.add_argument("--sims", type=int, default=settings.n_sims)
    simulate.add_argument("--n-perm", type=int, default=settings.n_perm)
    simulate.add_argument("--alpha", type=float, default=settings.alpha)
    simulate.add_argument("--seed", type=int, default=settings.audit_seed)
    simulate.add_argument("--workers", type=int, default=settings.workers)
    simulate.add_argument("--output-dir")

    duo = sub.add_parser("duo-demo", help="audit a synthetic cohort scored by the risk-profiling replica")
    duo.add_argument("--cohort", default=settings.cohort_config_path)
    duo.add_argument("--r2-table", default=settings.r2_table_path)
    duo.add_argument("--n", type=int)
    duo.add_argument("--seed", type=int, default=settings.audit_seed)
    duo.add_argument("--grid-preset", choices=["cub2014", "cub2019"])
    duo.add_argument("--output-dir")
    duo.add_argument("--xlsx", action="store_true")

    assign = sub.add_parser("assign", help="assign a CSV to a saved partition")
    assign.add_argument("--partition", required=True)
    assign.add_argument("--input", required=True)
    assign.add_argument("--schema", required=True)
    assign.add_argument("--output", required=True)
    return parser


def audit_config_from_args(args: argparse.Namespace) -> AuditConfig:
    exclude: Dict[str, List[str]] = {}
    for column, value in args.exclude:
        exclude.setdefault(column, []).append(value)
    fields: Dict[str, Any] = dict(
        input_path=args.input,
        schema_path=args.schema,
        metric_column=args.metric_column,
        splitter=args.splitter,
        grid=args.grid,
        grid_preset=args.grid_preset,
        folds=args.folds,
        test_fraction=args.test_fraction,
        alpha=args.alpha,
        correction=args.correction,
        seed=args.seed,
        max_iterations=args.max_iterations,
        metric_weight=args.metric_weight,
        exclude=exclude,
        drop_missing=args.drop_missing,
        output_dir=args.output_dir,
        xlsx=args.xlsx,
    )
    if args.grid_fractions:
        fields["grid_fractions"] = args.grid_fractions
    return AuditConfig(**fields)


def _output_dir(args: argparse.Namespace) -> Optional[Path]:
    if getattr(args, "output_dir", None):
        return Path(args.output_dir)
    if args.command == "assign":
        return Path(args.output).parent
    return default_output_dir(args.command, getattr(args, "experiment", None))


def emit_error(record: Dict[str, Any], output_dir: Optional[Path], clear: bool = True) -> None:
    """error.json in the output directory plus one JSON line on stderr.

    Owned outputs of an earlier run in the directory are removed first.
    """
    line = json.dumps(record, sort_keys=True, default=str)
    if output_dir is not None:
        try:
            if clear:
                clear_outputs(output_dir)
            output_dir.mkdir(parents=True, exist_ok=True)
            (output_dir / "error.json").write_text(json.dumps(record, indent=2, sort_keys=True,
                                                              default=str), encoding="utf-8")
        except OSError as exc:
            logger.warning("could not write error.json to %s: %s", output_dir, exc)
    print(line, file=sys.stderr)


def run_command(args: argparse.Namespace) -> None:
    if args.command == "audit":
        report = cmd_audit(audit_config_from_args(args))
        print(render_text(report))
    elif args.command == "simulate":
        request = SimulateRequest(
            experiment=args.experiment, scenario=args.scenario, k=args.k, n=args.n, d=args.d,
            mu_scale=args.mu_scale, sims=args.sims, n_perm=args.n_perm, alpha=args.alpha,
            seed=args.seed, workers=args.workers, output_dir=args.output_dir,
        )
        result = cmd_simulate(request)
        print(result.figure_table().to_string(index=False))
    elif args.command == "duo-demo":
        request = DuoDemoRequest(
            cohort=args.cohort, r2_table=args.r2_table, n=args.n, seed=args.seed,
            grid_preset=args.grid_preset, output_dir=args.output_dir, xlsx=args.xlsx,
        )
        print(render_text(cmd_duo_demo(request)))
    elif args.command == "assign":
        frame = cmd_assign(AssignRequest(partition=args.partition, input=args.input,
                                         schema_path=args.schema, output=args.output))
        print(f"{len(frame)} rows assigned -> {args.output}")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        run_command(args)
    except AuditError as exc:
        logger.error("%s", exc.message)
        emit_error(exc.to_record(), _output_dir(args), clear=args.command != "assign")
        return EXIT_DATA_ERROR
    except PydanticValidationError as exc:
        emit_error({"error": "usage_error", "message": str(exc)}, None)
        return EXIT_INTERNAL_ERROR
    except Exception as exc:
        logger.exception("internal error")
        emit_error({"error": "internal_error", "message": str(exc), "type": type(exc).__name__},
                   _output_dir(args), clear=args.command != "assign")
        return EXIT_INTERNAL_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
